#include "fluxspin/nv.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "fluxspin/errors.hpp"
#include "fluxspin/parallel.hpp"
#include "fluxspin/seeding.hpp"

namespace fluxspin {

namespace {

struct Cell {
  bool ok = false;
  double gamma = 0.0;
  double omega = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

PreparationStats summarize(const std::vector<double>& gammas, const std::vector<double>& shifts) {
  const MeanStd g = mean_std(gammas);
  const MeanStd s = mean_std(shifts);
  return {g.mean, g.std, s.mean, s.std, static_cast<int>(gammas.size())};
}

Eigen::Vector3d probe_direction(const FluctuatorSpec& spec) {
  const Eigen::Vector3d ground = spec.omega(0).vector();
  if (ground.norm() == 0.0) return Eigen::Vector3d::UnitX();
  const Eigen::Vector3d n = ground.normalized();
  Eigen::Vector3d d = Eigen::Vector3d::UnitX() - n * n.x();
  if (d.norm() < 1e-6) d = Eigen::Vector3d::UnitZ() - n * n.z();
  return d.normalized();
}

}  // namespace

void EnsembleSpec::validate() const {
  if (n_states < 2) throw InvalidArgument("ensemble needs at least one excited state (n_states >= 2)");
  if (!(gamma_rad > 0.0) || !std::isfinite(gamma_rad)) throw InvalidArgument("gamma_rad must be positive");
  if (!(excitation_rate > 0.0) || !std::isfinite(excitation_rate))
    throw InvalidArgument("excitation_rate must be positive");
  if (!(sigma_omega_ratio >= 0.0) || !std::isfinite(sigma_omega_ratio))
    throw InvalidArgument("sigma_omega_ratio must be non-negative");
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be at least 1");
  if (!std::isfinite(gamma0_offset) || gamma0_offset < 0.0) throw InvalidArgument("gamma0_offset must be non-negative");
  if (!std::isfinite(gamma_dark) || gamma_dark < 0.0) throw InvalidArgument("gamma_dark must be non-negative");
}

FluctuatorSpec random_excited_spec(const EnsembleSpec& e, double omega_g, int realization) {
  e.validate();
  if (!(omega_g > 0.0) || !std::isfinite(omega_g)) throw InvalidArgument("omega_g must be positive");
  const int n = e.n_states;
  std::uint64_t stream = 0;
  if (e.resample_per_point) stream = std::bit_cast<std::uint64_t>(omega_g) | 1ULL;
  std::mt19937_64 rng(derive_seed(e.seed, static_cast<std::uint64_t>(realization), stream));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = e.sigma_omega_ratio * omega_g;

  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  std::vector<PrecessionVector> omegas{{0.0, omega_g, 0.0}};
  std::vector<std::string> labels{"g"};
  for (int j = 1; j < n; ++j) {
    // Draw in a fixed order so the same seed always yields the same vectors.
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    omegas.push_back(PrecessionVector{x, y, z} * sigma);
    labels.push_back("e" + std::to_string(j));
    rates(j, 0) = e.excitation_rate / (n - 1);
    rates(0, j) = e.gamma_rad;
  }
  return FluctuatorSpec(std::move(rates), std::move(omegas), std::move(labels));
}

std::vector<double> default_fig2_grid(double gamma_rad) {
  constexpr int kPoints = 20;
  constexpr double kLo = 0.005;
  constexpr double kHi = 0.22;
  std::vector<double> grid;
  grid.reserve(kPoints);
  for (int k = 0; k < kPoints; ++k)
    grid.push_back(gamma_rad * kLo * std::pow(kHi / kLo, static_cast<double>(k) / (kPoints - 1)));
  grid.back() = gamma_rad * kHi;
  return grid;
}

SweepResult reproduce_fig2(const EnsembleSpec& e, std::span<const double> omega_g_grid, unsigned workers) {
  e.validate();
  for (std::size_t k = 0; k < omega_g_grid.size(); ++k) {
    const double w = omega_g_grid[k];
    if (!(w > 0.0) || w > 0.25 * e.gamma_rad * (1.0 + 1e-12))
      throw InvalidArgument("omega_g grid must lie in (0, 0.25 gamma]");
    if (k > 0 && w <= omega_g_grid[k - 1]) throw InvalidArgument("omega_g grid must be strictly increasing");
  }

  const std::size_t n_real = static_cast<std::size_t>(e.n_realizations);
  const std::size_t n_cells = omega_g_grid.size() * n_real;
  std::vector<Cell> x_cells(n_cells);
  std::vector<Cell> z_cells(n_cells);

  parallel_for(n_cells, workers, [&](std::size_t idx) {
    const double omega_g = omega_g_grid[idx / n_real];
    const int realization = static_cast<int>(idx % n_real);
    const FluctuatorSpec spec = random_excited_spec(e, omega_g, realization);
    std::optional<Generator> g;
    try {
      g.emplace(spec);
    } catch (const Error&) {
      return;
    }
    auto run = [&](const BlochVector& spin, Cell& cell) {
      try {
        const DecayAnalysis a = analyze_decay(*g, initial_joint_state(spec, spin, e.occupation));
        cell = {true, a.gamma_decay, a.omega_observed};
      } catch (const Error&) {
        cell.ok = false;
      }
    };
    run(BlochVector::pure(1.0, 0.0, 0.0), x_cells[idx]);
    run(BlochVector::pure(0.0, 0.0, 1.0), z_cells[idx]);
  });

  SweepResult result;
  result.gamma_rad = e.gamma_rad;
  result.gamma0_offset = e.gamma0_offset * e.gamma_rad;
  result.gamma_dark = e.gamma_dark * e.gamma_rad;
  result.n_realizations = e.n_realizations;
  result.rows.reserve(omega_g_grid.size());
  for (std::size_t k = 0; k < omega_g_grid.size(); ++k) {
    SweepRow row;
    row.omega_g = omega_g_grid[k];
    std::vector<double> gx, sx, gz, sz, g_all, s_all;
    for (std::size_t r = 0; r < n_real; ++r) {
      const Cell& cx = x_cells[k * n_real + r];
      const Cell& cz = z_cells[k * n_real + r];
      if (cx.ok) {
        gx.push_back(cx.gamma);
        sx.push_back(cx.omega - row.omega_g);
      } else {
        ++row.n_failed;
      }
      if (cz.ok) {
        gz.push_back(cz.gamma);
        sz.push_back(cz.omega - row.omega_g);
      } else {
        ++row.n_failed;
      }
    }
    row.x = summarize(gx, sx);
    row.z = summarize(gz, sz);
    g_all = gx;
    g_all.insert(g_all.end(), gz.begin(), gz.end());
    s_all = sx;
    s_all.insert(s_all.end(), sz.begin(), sz.end());
    const MeanStd g = mean_std(g_all);
    const MeanStd s = mean_std(s_all);
    row.gamma_mean = g.mean + result.gamma0_offset;
    row.gamma_std = g.std;
    row.shift_mean = s.mean;
    row.shift_std = s.std;
    result.rows.push_back(row);
  }
  return result;
}

AnisotropyResult anisotropy_scenario(double omega_g, double delta_z, double excitation_rate, double decay_rate,
                                     const Occupation& occupation) {
  const FluctuatorSpec spec = FluctuatorSpec::two_state(excitation_rate, decay_rate, {0.0, 0.0, omega_g},
                                                        {0.0, 0.0, omega_g + delta_z});
  const Generator g(spec);
  AnisotropyResult out;
  out.gamma_x = analyze_decay(g, initial_joint_state(spec, BlochVector::pure(1, 0, 0), occupation)).gamma_decay;
  out.gamma_z = analyze_decay(g, initial_joint_state(spec, BlochVector::pure(0, 0, 1), occupation)).gamma_decay;
  return out;
}

Eigen::Vector3d sweet_spot_probe(const FluctuatorSpec& spec) { return probe_direction(spec); }

SweetSpotResult sweet_spot(const FluctuatorSpec& spec, const Occupation& occupation) {
  const int n = spec.n_states();
  SweetSpotResult out;
  const BlochVector probe = BlochVector::pure(probe_direction(spec));
  auto shifted = [&](const PrecessionVector& c) {
    std::vector<PrecessionVector> w = spec.omegas();
    for (int j = 1; j < n; ++j) w[static_cast<std::size_t>(j)] += c;
    return spec.with_omegas(std::move(w));
  };
  auto gamma_of = [&](const PrecessionVector& c) {
    const FluctuatorSpec s = shifted(c);
    return analyze_decay(Generator(s), initial_joint_state(s, probe, occupation)).gamma_decay;
  };
  out.uncompensated_gamma = gamma_of({});
  out.residual_gamma = out.uncompensated_gamma;
  if (n == 1) return out;

  const Eigen::VectorXd p = stationary_distribution(spec).p;
  PrecessionVector weighted;
  double weight = 0.0;
  for (int j = 1; j < n; ++j) {
    weighted += p(j) * spec.omega(j);
    weight += p(j);
  }
  out.least_squares = spec.omega(0) - weighted * (1.0 / weight);

  double scale = 0.0;
  for (const auto& w : spec.omegas()) scale = std::max(scale, w.norm());
  double spread = 0.0;
  for (int j = 1; j < n; ++j) spread = std::max(spread, (spec.omega(j) + out.least_squares - spec.omega(0)).norm());
  out.compensable = spread <= 1e-12 * std::max(scale, 1.0);

  const double ls_gamma = gamma_of(out.least_squares);
  if (out.compensable || ls_gamma < out.uncompensated_gamma) {
    out.compensation = out.least_squares;
    out.residual_gamma = ls_gamma;
  }
  if (out.compensable) return out;

  // Compass search over the three components.
  double step = std::max(out.least_squares.norm(), 1e-3 * std::max(scale, 1.0)) / 2.0;
  const double min_step = 1e-6 * std::max(scale, 1.0);
  const std::array<PrecessionVector, 6> directions{
      PrecessionVector{1, 0, 0}, PrecessionVector{-1, 0, 0}, PrecessionVector{0, 1, 0},
      PrecessionVector{0, -1, 0}, PrecessionVector{0, 0, 1}, PrecessionVector{0, 0, -1}};
  for (int iter = 0; iter < 400 && step > min_step; ++iter) {
    bool improved = false;
    for (const auto& d : directions) {
      const PrecessionVector trial = out.compensation + d * step;
      const double g = gamma_of(trial);
      if (g < out.residual_gamma) {
        out.compensation = trial;
        out.residual_gamma = g;
        improved = true;
        break;
      }
    }
    if (!improved) step /= 2.0;
  }
  return out;
}

}  // namespace fluxspin
