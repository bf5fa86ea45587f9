#include "fluxspin/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fluxspin/parallel.hpp"

namespace fluxspin {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kAbsoluteAmplitudeFloor = 1e-10;
constexpr double kRelativeAmplitudeFloor = 1e-6;
constexpr double kPoorFitThreshold = 0.05;
constexpr int kMinSamples = 50;

// Complex Bloch vector of a vectorised (sub-)density matrix.
Eigen::Vector3cd bloch_components(const Eigen::Vector4cd& r) {
  return {r(1) + r(2), kI * (r(1) - r(2)), r(0) - r(3)};
}

std::optional<Eigen::Vector3d> quantization_axis(const FluctuatorSpec& spec) {
  PrecessionVector avg;
  try {
    avg = average_precession(spec);
  } catch (const Error&) {
    return std::nullopt;
  }
  double scale = 0.0;
  for (const auto& w : spec.omegas()) scale = std::max(scale, w.norm());
  if (avg.norm() <= 1e-12 * scale || avg.norm() == 0.0) return std::nullopt;
  return avg.vector().normalized();
}

// Variable-projection objective for the damped cosine model: given
// (gamma, omega), the best (a, b, c) in e^{-gamma t}(a cos + b sin) + c.
struct ProjectedFit {
  Eigen::VectorXd residual;
  Eigen::Vector3d linear;
};

ProjectedFit project(const Eigen::VectorXd& t, const Eigen::VectorXd& s, double gamma, double omega) {
  const Eigen::Index n = t.size();
  Eigen::MatrixXd basis(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double envelope = std::exp(-gamma * t(k));
    basis(k, 0) = envelope * std::cos(omega * t(k));
    basis(k, 1) = envelope * std::sin(omega * t(k));
    basis(k, 2) = 1.0;
  }
  ProjectedFit fit;
  fit.linear = basis.completeOrthogonalDecomposition().solve(s);
  fit.residual = s - basis * fit.linear;
  return fit;
}

struct DampedCosineResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Eigen::VectorXd* t;
  const Eigen::VectorXd* s;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(t->size()); }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out = project(*t, *s, std::abs(x(0)), std::abs(x(1))).residual;
    return 0;
  }
};

double periodogram_peak(const Eigen::VectorXd& t, const Eigen::VectorXd& s) {
  const Eigen::Index n = t.size();
  const double span = t(n - 1) - t(0);
  const double dt = span / static_cast<double>(n - 1);
  const double nyquist = std::numbers::pi / dt;
  const double step = std::numbers::pi / (2.0 * span);
  const Eigen::VectorXd centred = s.array() - s.mean();
  double best_power = -1.0;
  double best_omega = 0.0;
  for (double omega = step; omega <= nyquist; omega += step) {
    Complex acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += centred(k) * std::polar(1.0, -omega * t(k));
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  return best_omega;
}

}  // namespace

DecayAnalysis extract_spectral(const Generator& g, const JointState& s0) {
  const SpectralModes modes = spectral_modes(g, s0);
  const std::optional<Eigen::Vector3d> axis = quantization_axis(g.spec());
  const int n = g.n_states();

  double scale = 0.0;
  for (const auto& m : modes.modes) scale = std::max(scale, std::abs(m.eigenvalue));
  const double stationary_tol = 1e-10 * std::max(scale, 1.0);
  const double rate_floor = 1e-13 * std::max(scale, 1.0);

  struct Candidate {
    const SpectralMode* mode;
    double amplitude;
  };
  std::vector<Candidate> candidates;
  double max_amplitude = 0.0;
  for (const auto& m : modes.modes) {
    if (std::abs(m.eigenvalue) <= stationary_tol) continue;
    Eigen::Vector4cd reduced = Eigen::Vector4cd::Zero();
    for (int i = 0; i < n; ++i) reduced += m.vector.segment<4>(4 * i);
    Eigen::Vector3cd b = bloch_components(reduced);
    if (axis) b -= axis->cast<Complex>() * (axis->cast<Complex>().transpose() * b)(0);
    const double amplitude = std::abs(m.overlap) * b.norm();
    candidates.push_back({&m, amplitude});
    max_amplitude = std::max(max_amplitude, amplitude);
  }

  const double floor = std::max(kAbsoluteAmplitudeFloor, kRelativeAmplitudeFloor * max_amplitude);
  const Candidate* best = nullptr;
  double best_score = -1.0;
  for (const auto& c : candidates) {
    if (c.amplitude <= floor) continue;
    const double score = c.amplitude / std::max(std::abs(c.mode->eigenvalue.real()), rate_floor);
    bool take = !best || score > best_score * (1.0 + 1e-9);
    // Conjugate pairs tie; keep the positive-frequency member.
    if (!take && score >= best_score * (1.0 - 1e-9)) take = c.mode->eigenvalue.imag() > best->mode->eigenvalue.imag();
    if (take) {
      best = &c;
      best_score = score;
    }
  }

  DecayAnalysis out;
  out.method = DecayMethod::Spectral;
  if (!best) return out;
  const Complex lambda = best->mode->eigenvalue;
  out.gamma_decay = -lambda.real();
  out.oscillating = std::abs(lambda.imag()) > stationary_tol;
  out.omega_observed = out.oscillating ? std::abs(lambda.imag()) : 0.0;
  out.amplitude = best->amplitude;
  return out;
}

DecayAnalysis fit_time_domain(std::span<const double> times, std::span<const BlochVector> series,
                              const PrecessionVector& axis) {
  if (times.size() != series.size()) throw InvalidArgument("time grid and Bloch series differ in length");
  if (times.size() < static_cast<std::size_t>(kMinSamples))
    throw InvalidArgument("time-domain fit needs at least " + std::to_string(kMinSamples) + " samples");
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::VectorXd t(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    t(k) = times[static_cast<std::size_t>(k)];
    if (!std::isfinite(t(k)) || (k > 0 && t(k) <= t(k - 1)))
      throw InvalidArgument("time grid must be finite and strictly increasing");
  }

  // Transverse direction of the initial Bloch vector.
  const Eigen::Vector3d b0 = series.front().vector();
  Eigen::Vector3d direction = b0;
  if (axis.norm() > 0.0) {
    const Eigen::Vector3d n_axis = axis.vector().normalized();
    direction = b0 - n_axis * n_axis.dot(b0);
    if (direction.norm() <= 1e-12) direction = n_axis.unitOrthogonal();
  } else if (direction.norm() <= 1e-12) {
    direction = Eigen::Vector3d::UnitX();
  }
  direction.normalize();

  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) s(k) = series[static_cast<std::size_t>(k)].vector().dot(direction);

  DecayAnalysis out;
  out.method = DecayMethod::TimeDomainFit;
  const double spread = (s.array() - s.mean()).abs().maxCoeff();
  if (spread <= 1e-10) {
    out.confidence = 0.0;
    return out;
  }

  const Eigen::VectorXd shifted = t.array() - t(0);
  const double span = shifted(n - 1);
  const double peak = periodogram_peak(shifted, s);
  const double bin = std::numbers::pi / (2.0 * span);

  std::vector<double> omega_grid{0.0};
  for (int j = -4; j <= 4; ++j) omega_grid.push_back(std::max(0.0, peak + 0.5 * j * bin));
  std::vector<double> gamma_grid{0.0};
  const double gamma_lo = 0.01 / span;
  const double gamma_hi = 0.5 * static_cast<double>(n) / span;
  constexpr int kGammaSteps = 48;
  for (int j = 0; j <= kGammaSteps; ++j)
    gamma_grid.push_back(gamma_lo * std::pow(gamma_hi / gamma_lo, static_cast<double>(j) / kGammaSteps));

  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(2);
  for (double w : omega_grid) {
    for (double gm : gamma_grid) {
      const double rss = project(shifted, s, gm, w).residual.squaredNorm();
      if (rss < best_rss) {
        best_rss = rss;
        x << gm, w;
      }
    }
  }

  DampedCosineResidual functor{&shifted, &s};
  Eigen::NumericalDiff<DampedCosineResidual> numeric(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<DampedCosineResidual>> lm(numeric);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.minimize(x);

  const double gamma = std::abs(x(0));
  const double omega = std::abs(x(1));
  const ProjectedFit fit = project(shifted, s, gamma, omega);
  const double amplitude = std::hypot(fit.linear(0), fit.linear(1));
  const double rss = fit.residual.squaredNorm();
  const double rms = std::sqrt(rss / static_cast<double>(n));

  out.gamma_decay = gamma;
  out.omega_observed = omega;
  out.amplitude = amplitude;
  out.oscillating = omega > 0.0;
  out.fit_residual = amplitude > 0.0 ? rms / amplitude : rms;

  Eigen::MatrixXd jac(n, 2);
  Eigen::VectorXd at(2);
  at << gamma, omega;
  numeric.df(at, jac);
  const Eigen::Matrix2d info = jac.transpose() * jac;
  if (n > 5 && std::abs(info.determinant()) > 0.0) {
    const double sigma2 = rss / static_cast<double>(n - 5);
    out.confidence = std::sqrt(std::max(0.0, sigma2 * info.inverse()(0, 0)));
  }

  if (rms > kPoorFitThreshold * amplitude)
    throw PoorFit("damped cosine fit residual " + std::to_string(out.fit_residual) + " exceeds " +
                      std::to_string(kPoorFitThreshold) + " of the amplitude",
                  out);
  if (span * omega < 4.0 * std::numbers::pi && span * gamma < 3.0)
    throw InvalidArgument("time grid spans fewer than two oscillation periods and three decay times");
  return out;
}

DecayAnalysis analyze_decay(const Generator& g, const JointState& s0) {
  if (g.well_conditioned()) return extract_spectral(g, s0);
  const std::vector<double> times = default_time_grid(g.spec());
  std::vector<BlochVector> series;
  series.reserve(times.size());
  for (const JointState& s : propagate(g, s0, times)) series.push_back(bloch_from_density(reduce(s)));
  return fit_time_domain(times, series, average_precession(g.spec()));
}

FluctuatorSpec CrossoverTemplate::build(double delta_omega) const {
  const double r_tot = total_rate();
  if (!(r_tot > 0.0)) throw InvalidArgument("crossover template needs positive rates");
  const double pa = rate_ab / r_tot;
  const double pb = rate_ba / r_tot;
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw InvalidArgument("crossover direction must be nonzero");
  const PrecessionVector d = direction * (1.0 / norm);
  return FluctuatorSpec::two_state(rate_ba, rate_ab, mean_omega + (pb * delta_omega) * d,
                                   mean_omega - (pa * delta_omega) * d);
}

CrossoverCurve crossover_scan(const CrossoverTemplate& tmpl, std::span<const double> delta_omega_grid,
                              unsigned workers) {
  for (std::size_t k = 0; k < delta_omega_grid.size(); ++k) {
    const double d = delta_omega_grid[k];
    if (!std::isfinite(d) || d < 0.0) throw InvalidArgument("delta omega grid must be finite and non-negative");
    if (k > 0 && d <= delta_omega_grid[k - 1]) throw InvalidArgument("delta omega grid must be strictly increasing");
  }
  // Validates rates and direction before fanning out.
  (void)tmpl.build(0.0);

  CrossoverCurve curve;
  curve.rate_scale = tmpl.total_rate();
  curve.points.resize(delta_omega_grid.size());
  parallel_for(delta_omega_grid.size(), workers, [&](std::size_t k) {
    CrossoverPoint& point = curve.points[k];
    point.delta_omega = delta_omega_grid[k];
    try {
      const FluctuatorSpec spec = tmpl.build(point.delta_omega);
      const Generator g(spec);
      const DecayAnalysis a = analyze_decay(g, initial_joint_state(spec, tmpl.initial_spin, tmpl.occupation));
      point.gamma_decay = a.gamma_decay;
      point.omega_observed = a.omega_observed;
    } catch (const Error& e) {
      point.valid = false;
      point.error = e.what();
    }
  });
  return curve;
}

}  // namespace fluxspin
