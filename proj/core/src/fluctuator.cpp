#include "fluxspin/fluctuator.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fluxspin/errors.hpp"

namespace fluxspin {

FluctuatorSpec::FluctuatorSpec(Eigen::MatrixXd rates, std::vector<PrecessionVector> omegas,
                               std::vector<std::string> labels)
    : rates_(std::move(rates)), omegas_(std::move(omegas)), labels_(std::move(labels)) {
  const auto n = static_cast<Eigen::Index>(omegas_.size());
  if (n < 1) throw InvalidArgument("fluctuator needs at least one state");
  if (rates_.rows() != n || rates_.cols() != n)
    throw InvalidArgument("rate matrix is " + std::to_string(rates_.rows()) + "x" +
                          std::to_string(rates_.cols()) + " but there are " + std::to_string(n) +
                          " precession vectors");
  rates_.diagonal().setZero();
  if (!rates_.allFinite()) throw InvalidArgument("rate matrix has non-finite entries");
  if ((rates_.array() < 0.0).any()) throw InvalidArgument("rate matrix has negative entries");
  for (const auto& w : omegas_)
    if (!w.is_finite()) throw InvalidArgument("precession vector has non-finite components");
  if (labels_.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) labels_.push_back(std::to_string(i + 1));
  } else if (static_cast<Eigen::Index>(labels_.size()) != n) {
    throw InvalidArgument("label count does not match state count");
  }
}

FluctuatorSpec FluctuatorSpec::single_state(const PrecessionVector& omega) {
  return FluctuatorSpec(Eigen::MatrixXd::Zero(1, 1), {omega});
}

FluctuatorSpec FluctuatorSpec::two_state(double rate_ba, double rate_ab, const PrecessionVector& omega_a,
                                         const PrecessionVector& omega_b) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
  r(1, 0) = rate_ba;
  r(0, 1) = rate_ab;
  return FluctuatorSpec(std::move(r), {omega_a, omega_b}, {"a", "b"});
}

double FluctuatorSpec::max_exit_rate() const { return rates_.colwise().sum().maxCoeff(); }

FluctuatorSpec FluctuatorSpec::with_omegas(std::vector<PrecessionVector> omegas) const {
  return FluctuatorSpec(rates_, std::move(omegas), labels_);
}

Eigen::MatrixXd classical_generator(const FluctuatorSpec& spec) {
  Eigen::MatrixXd q = spec.rates();
  for (int j = 0; j < spec.n_states(); ++j) q(j, j) = -spec.exit_rate(j);
  return q;
}

bool is_irreducible(const FluctuatorSpec& spec) {
  const int n = spec.n_states();
  // Reachability from state 0 along forward and reversed edges.
  auto reaches_all = [&](bool reversed) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      for (int i = 0; i < n; ++i) {
        const double r = reversed ? spec.rate(j, i) : spec.rate(i, j);
        if (r > 0.0 && !seen[static_cast<std::size_t>(i)]) {
          seen[static_cast<std::size_t>(i)] = 1;
          stack.push_back(i);
        }
      }
    }
    for (char s : seen)
      if (!s) return false;
    return true;
  };
  return reaches_all(false) && reaches_all(true);
}

StationaryDistribution stationary_distribution(const FluctuatorSpec& spec) {
  const int n = spec.n_states();
  if (n == 1) return {Eigen::VectorXd::Ones(1)};
  if (spec.rates().maxCoeff() == 0.0) throw ZeroRates("all transition rates are zero");
  if (!is_irreducible(spec)) throw NonErgodic("fluctuator transition graph is not strongly connected");

  const Eigen::MatrixXd q = classical_generator(spec);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // Singular values are sorted descending; the last spans the null space.
  if (sv(n - 2) <= 1e-12 * sv(0)) throw NonErgodic("stationary distribution is not unique");

  Eigen::VectorXd p = svd.matrixV().col(n - 1);
  p /= p.sum();
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return {p};
}

PrecessionVector average_precession(const FluctuatorSpec& spec) {
  const Eigen::VectorXd p = stationary_distribution(spec).p;
  PrecessionVector avg;
  for (int i = 0; i < spec.n_states(); ++i) avg += p(i) * spec.omega(i);
  return avg;
}

FluctuatorSpec compose(const FluctuatorSpec& a, const FluctuatorSpec& b) {
  const int na = a.n_states();
  const int nb = b.n_states();
  const int n = na * nb;
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  std::vector<PrecessionVector> omegas;
  std::vector<std::string> labels;
  omegas.reserve(static_cast<std::size_t>(n));
  labels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const int from = i * nb + j;
      omegas.push_back(a.omega(i) + b.omega(j));
      labels.push_back(a.labels()[static_cast<std::size_t>(i)] + "|" + b.labels()[static_cast<std::size_t>(j)]);
      for (int i2 = 0; i2 < na; ++i2)
        if (i2 != i) rates(i2 * nb + j, from) = a.rate(i2, i);
      for (int j2 = 0; j2 < nb; ++j2)
        if (j2 != j) rates(i * nb + j2, from) = b.rate(j2, j);
    }
  }
  return FluctuatorSpec(std::move(rates), std::move(omegas), std::move(labels));
}

AsymptoticRates asymptotic_rates(const FluctuatorSpec& spec) {
  if (spec.n_states() != 2)
    throw NotSupported("asymptotic rates are defined for two-state fluctuators only");
  const Eigen::VectorXd p = stationary_distribution(spec).p;
  const double r_tot = spec.rate(0, 1) + spec.rate(1, 0);
  const Eigen::Vector3d diff = (spec.omega(0) - spec.omega(1)).vector();
  const Eigen::Vector3d mean = (p(0) * spec.omega(0) + p(1) * spec.omega(1)).vector();
  const double variance = p(0) * p(1);
  if (diff.norm() == 0.0) return {};

  const double scale = spec.omega(0).norm() + spec.omega(1).norm();
  const Eigen::Vector3d axis = mean.norm() > 1e-12 * scale ? mean.normalized() : diff.normalized();
  const double par = diff.dot(axis);
  const double perp2 = std::max(0.0, diff.squaredNorm() - par * par);
  const double larmor = mean.norm();

  AsymptoticRates out;
  out.gamma_phi = variance * par * par / r_tot;
  out.gamma_1 = variance * perp2 * r_tot / (r_tot * r_tot + larmor * larmor);
  out.gamma_2 = out.gamma_phi + 0.5 * out.gamma_1;
  return out;
}

}  // namespace fluxspin
