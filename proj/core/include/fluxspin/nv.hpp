#pragma once

// Optically illuminated nuclear spin near an NV centre: the ground electronic
// state plus N - 1 optically excited states whose precession vectors are not
// known and are drawn at random.

#include <cstdint>
#include <span>
#include <vector>

#include "fluxspin/decay.hpp"
#include "fluxspin/fluctuator.hpp"
#include "fluxspin/master_equation.hpp"

namespace fluxspin {

inline constexpr std::uint64_t kDefaultSeed = 12345;

struct EnsembleSpec {
  int n_states = 3;
  double sigma_omega_ratio = 2.5;  // sigma_w / w_g
  double gamma_rad = 86.0;         // radiative decay rate, 1/us
  double excitation_rate = 86.0;   // total excitation rate R, 1/us
  int n_realizations = 50;
  std::uint64_t seed = kDefaultSeed;
  Occupation occupation = Occupation::ground_only();
  double gamma0_offset = 3.4e-3;  // in units of gamma_rad; added to reported Gamma
  double gamma_dark = 3e-4;       // in units of gamma_rad; reported only
  // Draw fresh excited-state vectors at every w_g instead of rescaling one
  // fixed set of dimensionless draws.
  bool resample_per_point = false;

  // Throws InvalidArgument on N < 2, non-positive rates or ratios, or no realizations.
  void validate() const;
};

// State 0 is the ground state with w = w_g y. States 1..N-1 have i.i.d.
// Normal(0, sigma_w^2) components, sigma_w = ratio * w_g. Rates: ground ->
// excited R / (N - 1), excited -> ground gamma_rad, none between excited
// states. Deterministic in (seed, realization) and, with
// resample_per_point, also in w_g.
FluctuatorSpec random_excited_spec(const EnsembleSpec& e, double omega_g, int realization);

struct PreparationStats {
  double gamma_mean = 0.0;  // excludes the Gamma_0 offset
  double gamma_std = 0.0;
  double shift_mean = 0.0;
  double shift_std = 0.0;
  int n_valid = 0;
};

struct SweepRow {
  double omega_g = 0.0;
  double gamma_mean = 0.0;  // includes the Gamma_0 offset
  double gamma_std = 0.0;
  double shift_mean = 0.0;  // mean observed frequency minus w_g
  double shift_std = 0.0;
  PreparationStats x;  // spin prepared along x
  PreparationStats z;  // spin prepared along z
  int n_failed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double gamma_rad = 0.0;      // normalisation constant for dimensionless output
  double gamma0_offset = 0.0;  // 1/us, already added to gamma_mean
  double gamma_dark = 0.0;     // 1/us
  int n_realizations = 0;

  // Photons scattered per coherence time at vanishing field, gamma / Gamma_0.
  double photons_per_coherence() const { return gamma_rad / gamma0_offset; }
};

// For each w_g (strictly increasing, inside (0, 0.25 gamma]) and realization,
// extracts Gamma and the observed frequency for x and z preparations, then
// averages over realizations. Standard deviations are sample deviations over
// realizations. Cells whose extraction fails are counted in n_failed.
SweepResult reproduce_fig2(const EnsembleSpec& e, std::span<const double> omega_g_grid, unsigned workers = 0);

// 20 log-spaced points on [0.005, 0.22] gamma.
std::vector<double> default_fig2_grid(double gamma_rad);

struct AnisotropyResult {
  double gamma_x = 0.0;
  double gamma_z = 0.0;
};

// Two-state fluctuator with both precession vectors along z: w_g z in the
// ground state, (w_g + delta_z) z in the excited one. Returns Gamma for spins
// prepared along x and along z.
AnisotropyResult anisotropy_scenario(double omega_g, double delta_z, double excitation_rate, double decay_rate,
                                     const Occupation& occupation = Occupation::ground_only());

struct SweetSpotResult {
  PrecessionVector compensation;  // added to every excited state's vector
  PrecessionVector least_squares;  // stationary-weighted least-squares shift
  double residual_gamma = 0.0;
  double uncompensated_gamma = 0.0;
  // False when no single shift makes all vectors equal (N > 2).
  bool compensable = true;
};

// Uniform shift c of the excited states (1..N-1) that best matches the
// ground state. The least-squares shift c = w_0 - sum_j p_j w_j / sum_j p_j
// (excited j, stationary weights p) equalises all vectors whenever that is
// possible, and is then returned as is. Otherwise it seeds a pattern search
// that minimises the measured Gamma, since the smallest spread does not in
// general give the smallest Gamma. Gamma is measured on a spin prepared
// perpendicular to the ground-state vector.
// Probe direction used by sweet_spot: x with its component along w_0 removed
// (z when x is parallel to w_0, x when w_0 = 0).
Eigen::Vector3d sweet_spot_probe(const FluctuatorSpec& spec);

SweetSpotResult sweet_spot(const FluctuatorSpec& spec, const Occupation& occupation = Occupation::ground_only());

}  // namespace fluxspin
