#include "fluxspin/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "fluxspin/errors.hpp"

namespace fluxspin {

namespace {

constexpr double kCheckpointTolerance = 1e-7;

JointState to_joint_state(const Eigen::VectorXcd& v, double time) {
  try {
    return JointState::from_vector(v, time, kPropagationTolerance);
  } catch (const InvalidArgument& e) {
    throw NumericalDegeneracy(std::string("propagated state lost Hermiticity: ") + e.what());
  }
}

}  // namespace

Eigen::VectorXd occupation_probabilities(const FluctuatorSpec& spec, const Occupation& occupation) {
  const int n = spec.n_states();
  switch (occupation.kind) {
    case Occupation::Kind::GroundOnly: {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
      p(0) = 1.0;
      return p;
    }
    case Occupation::Kind::Stationary:
      return stationary_distribution(spec).p;
    case Occupation::Kind::Custom: {
      const Eigen::VectorXd& p = occupation.custom;
      if (p.size() != n)
        throw InvalidArgument("occupation has " + std::to_string(p.size()) + " entries, expected " +
                              std::to_string(n));
      if (!p.allFinite() || (p.array() < 0.0).any())
        throw InvalidArgument("occupation entries must be finite and non-negative");
      if (std::abs(p.sum() - 1.0) > 1e-9) throw InvalidArgument("occupation does not sum to 1");
      return p;
    }
  }
  throw InvalidArgument("unknown occupation kind");
}

Eigen::VectorXcd JointState::vectorized() const {
  Eigen::VectorXcd v(4 * static_cast<Eigen::Index>(rhos.size()));
  for (std::size_t i = 0; i < rhos.size(); ++i) v.segment<4>(4 * static_cast<Eigen::Index>(i)) = rhos[i].vectorized();
  return v;
}

Eigen::VectorXd JointState::populations() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(rhos.size()));
  for (std::size_t i = 0; i < rhos.size(); ++i) p(static_cast<Eigen::Index>(i)) = rhos[i].trace();
  return p;
}

JointState JointState::from_vector(const Eigen::VectorXcd& v, double time, double tolerance) {
  if (v.size() % 4 != 0 || v.size() == 0) throw InvalidArgument("joint state vector length must be a positive multiple of 4");
  JointState s;
  s.time = time;
  s.rhos.reserve(static_cast<std::size_t>(v.size() / 4));
  for (Eigen::Index i = 0; i < v.size(); i += 4) s.rhos.push_back(DensityMatrix::from_vector(v.segment<4>(i), tolerance));
  return s;
}

Generator::Generator(FluctuatorSpec spec) : spec_(std::move(spec)) {
  const int n = spec_.n_states();
  const Eigen::Index dim = 4 * n;
  matrix_ = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
  for (int i = 0; i < n; ++i) {
    matrix_.block<4, 4>(4 * i, 4 * i) = liouvillian(spec_.omega(i)) - spec_.exit_rate(i) * id;
    for (int j = 0; j < n; ++j)
      if (j != i) matrix_.block<4, 4>(4 * i, 4 * j) = spec_.rate(i, j) * id;
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix_, true);
  if (solver.info() != Eigen::Success) throw NumericalDegeneracy("eigendecomposition of the generator failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  for (Eigen::Index k = 0; k < dim; ++k) eigenvectors_.col(k).normalize();

  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(eigenvectors_).singularValues();
  const double smallest = sv(dim - 1);
  condition_number_ = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  if (std::isfinite(condition_number_)) inverse_eigenvectors_ = eigenvectors_.partialPivLu().inverse();
}

Generator build_generator(const FluctuatorSpec& spec) { return Generator(spec); }

std::vector<JointState> propagate(const Generator& g, const JointState& s0, std::span<const double> times) {
  if (s0.n_states() != g.n_states())
    throw InvalidArgument("initial state has " + std::to_string(s0.n_states()) + " blocks, generator has " +
                          std::to_string(g.n_states()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0) throw InvalidArgument("time grid must be finite and non-negative");
    if (k > 0 && times[k] < times[k - 1]) throw InvalidArgument("time grid must be sorted ascending");
  }

  const Eigen::VectorXcd v0 = s0.vectorized();
  std::vector<JointState> out;
  out.reserve(times.size());
  auto exact = [&](double t) -> Eigen::VectorXcd {
    const Eigen::MatrixXcd propagator = (g.matrix() * t).exp();
    return propagator * v0;
  };

  if (!g.well_conditioned()) {
    for (double t : times) out.push_back(to_joint_state(exact(t), t));
    return out;
  }

  const Eigen::VectorXcd coeffs = g.inverse_eigenvectors() * v0;
  Eigen::VectorXcd last;
  for (double t : times) {
    const Eigen::VectorXcd phases = (g.eigenvalues() * t).array().exp().matrix();
    last = g.eigenvectors() * coeffs.cwiseProduct(phases);
    out.push_back(to_joint_state(last, t));
  }
  if (!times.empty() && times.back() > 0.0) {
    const double gap = (last - exact(times.back())).cwiseAbs().maxCoeff();
    if (gap > kCheckpointTolerance)
      throw NumericalDegeneracy("spectral and exponential propagation disagree by " + std::to_string(gap));
  }
  return out;
}

DensityMatrix reduce(const JointState& s) {
  DensityMatrix total;
  for (const auto& rho : s.rhos) total += rho;
  return total;
}

SpectralModes spectral_modes(const Generator& g, const JointState& s0) {
  if (!g.well_conditioned())
    throw NumericalDegeneracy("generator eigenvectors are ill-conditioned (condition number " +
                              std::to_string(g.condition_number()) + ")");
  if (s0.n_states() != g.n_states()) throw InvalidArgument("initial state does not match generator");
  const Eigen::VectorXcd coeffs = g.inverse_eigenvectors() * s0.vectorized();
  SpectralModes out;
  out.modes.reserve(static_cast<std::size_t>(g.dimension()));
  for (int k = 0; k < g.dimension(); ++k)
    out.modes.push_back({g.eigenvalues()(k), g.eigenvectors().col(k), coeffs(k)});
  std::stable_sort(out.modes.begin(), out.modes.end(), [](const SpectralMode& a, const SpectralMode& b) {
    const double ra = std::abs(a.eigenvalue.real());
    const double rb = std::abs(b.eigenvalue.real());
    if (ra != rb) return ra < rb;
    return a.eigenvalue.imag() < b.eigenvalue.imag();
  });
  return out;
}

JointState initial_joint_state(const FluctuatorSpec& spec, const BlochVector& spin, const Occupation& occupation) {
  if (std::abs(spin.w - 1.0) > 1e-12) throw InvalidArgument("initial spin state must have unit trace");
  const DensityMatrix rho = density_from_bloch(spin);
  const Eigen::VectorXd p = occupation_probabilities(spec, occupation);
  JointState s;
  s.rhos.reserve(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) s.rhos.push_back(p(i) * rho);
  return s;
}

std::vector<double> linear_grid(double t0, double t1, int n) {
  if (n < 1) throw InvalidArgument("grid needs at least one point");
  if (!(t1 >= t0)) throw InvalidArgument("grid end precedes grid start");
  std::vector<double> grid(static_cast<std::size_t>(n));
  if (n == 1) {
    grid[0] = t0;
    return grid;
  }
  const double step = (t1 - t0) / (n - 1);
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = t0 + step * k;
  grid.back() = t1;
  return grid;
}

std::vector<double> default_time_grid(const FluctuatorSpec& spec) {
  constexpr int kPoints = 2000;
  const double rate = spec.max_exit_rate();
  if (rate <= 0.0) {
    const double larmor = spec.omega(0).norm();
    const double span = larmor > 0.0 ? 100.0 * 2.0 * std::numbers::pi / larmor : 1.0;
    return linear_grid(0.0, span, kPoints);
  }
  double span = 500.0 / rate;
  if (spec.n_states() == 2) {
    try {
      const double est = asymptotic_rates(spec).gamma_2;
      if (est > 0.0) span = std::min(span, 10.0 / est);
    } catch (const Error&) {
      // no estimate for this spec; keep the rate-based span
    }
  }
  return linear_grid(0.0, span, kPoints);
}

}  // namespace fluxspin
