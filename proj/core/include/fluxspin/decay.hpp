#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluxspin/errors.hpp"
#include "fluxspin/fluctuator.hpp"
#include "fluxspin/master_equation.hpp"
#include "fluxspin/quantum.hpp"

namespace fluxspin {

enum class DecayMethod { Spectral, TimeDomainFit };

// Decay of the transverse (oscillating) Bloch component.
struct DecayAnalysis {
  double gamma_decay = 0.0;     // 1/us
  double omega_observed = 0.0;  // rad/us
  DecayMethod method = DecayMethod::Spectral;
  double fit_residual = 0.0;  // RMS residual over fitted amplitude
  std::optional<double> confidence;  // standard error of gamma_decay, fits only
  bool oscillating = false;
  double amplitude = 0.0;
};

// Thrown by fit_time_domain when a single damped cosine does not describe
// the data (RMS residual above 5% of the amplitude). The fit is kept.
class PoorFit : public Error {
 public:
  PoorFit(const std::string& what, DecayAnalysis analysis) : Error(what), analysis_(analysis) {}
  const DecayAnalysis& analysis() const { return analysis_; }

 private:
  DecayAnalysis analysis_;
};

// Picks the eigenmode that dominates the transverse signal of s0.
//
// Every non-stationary mode k contributes c_k e^{lambda_k t} b_k to the
// reduced Bloch vector; its transverse weight a_k = |c_k| |b_k,perp| is taken
// relative to the quantization axis <w> (the whole Bloch vector when <w> = 0).
// The selected mode maximises the integrated contribution a_k / |Re lambda_k|,
// so undamped modes win outright and negligible slow modes do not. Gamma is
// -Re lambda and omega_observed is |Im lambda| (0 for a real mode, which also
// clears `oscillating`). A state with no transverse dynamics at all reports
// Gamma = 0.
//
// Throws NumericalDegeneracy when the eigenvectors are ill-conditioned.
DecayAnalysis extract_spectral(const Generator& g, const JointState& s0);

// Fits s(t) = A e^{-Gamma t} cos(omega t + phi) + C to the Bloch component
// along the initial transverse direction (relative to `axis`). The linear
// parameters are projected out; (Gamma, omega) come from a grid search seeded
// by the periodogram peak followed by Levenberg-Marquardt refinement.
//
// Requires >= 50 samples; a non-constant signal must span two periods or
// three decay times. Throws PoorFit when RMS residual > 0.05 A.
DecayAnalysis fit_time_domain(std::span<const double> times, std::span<const BlochVector> series,
                              const PrecessionVector& axis);

// Spectral extraction, or a time-domain fit over default_time_grid when the
// eigenvectors are too ill-conditioned for a modal decomposition (near an
// exceptional point). A PoorFit from the fallback propagates.
DecayAnalysis analyze_decay(const Generator& g, const JointState& s0);

// Two-state fluctuator family with fixed rates and mean precession vector,
// parameterised by the size of the difference w_a - w_b along `direction`.
struct CrossoverTemplate {
  double rate_ba = 0.5;  // a -> b
  double rate_ab = 0.5;  // b -> a
  PrecessionVector mean_omega{0.0, 0.0, 0.0};
  PrecessionVector direction{0.0, 0.0, 1.0};
  BlochVector initial_spin{1.0, 0.0, 0.0, 1.0};
  Occupation occupation = Occupation::stationary();

  double total_rate() const { return rate_ba + rate_ab; }
  // w_a = <w> + p_b dw d, w_b = <w> - p_a dw d, so the stationary average is <w>.
  FluctuatorSpec build(double delta_omega) const;
};

struct CrossoverPoint {
  double delta_omega = 0.0;
  double gamma_decay = 0.0;
  double omega_observed = 0.0;
  bool valid = true;
  std::string error;
};

struct CrossoverCurve {
  std::vector<CrossoverPoint> points;
  double rate_scale = 0.0;  // r_tot, for dimensionless reporting
};

// Spectral Gamma for each delta_omega of a strictly increasing, non-negative
// grid. A point whose extraction fails is marked invalid and the scan goes on.
CrossoverCurve crossover_scan(const CrossoverTemplate& tmpl, std::span<const double> delta_omega_grid,
                              unsigned workers = 0);

}  // namespace fluxspin
