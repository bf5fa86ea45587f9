#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluxspin/quantum.hpp"

namespace fluxspin {

// An N-state classical fluctuator. rates(i, j) is the transition rate from
// state j to state i (1/us); the diagonal is never stored; the exit rate of
// state j is the column sum of the off-diagonal entries. Each state carries
// the precession vector the spin sees while the fluctuator sits in it.
class FluctuatorSpec {
 public:
  // Diagonal entries of `rates` are ignored. Throws InvalidArgument on
  // negative or non-finite rates, a size mismatch, or non-finite vectors.
  FluctuatorSpec(Eigen::MatrixXd rates, std::vector<PrecessionVector> omegas,
                 std::vector<std::string> labels = {});

  static FluctuatorSpec single_state(const PrecessionVector& omega);

  // States a (index 0) and b (index 1); rate_ba is the a -> b rate.
  static FluctuatorSpec two_state(double rate_ba, double rate_ab, const PrecessionVector& omega_a,
                                  const PrecessionVector& omega_b);

  int n_states() const { return static_cast<int>(omegas_.size()); }
  double rate(int to, int from) const { return rates_(to, from); }
  double exit_rate(int from) const { return rates_.col(from).sum(); }
  double max_exit_rate() const;
  const Eigen::MatrixXd& rates() const { return rates_; }
  const std::vector<PrecessionVector>& omegas() const { return omegas_; }
  const PrecessionVector& omega(int i) const { return omegas_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  FluctuatorSpec with_omegas(std::vector<PrecessionVector> omegas) const;

 private:
  Eigen::MatrixXd rates_;
  std::vector<PrecessionVector> omegas_;
  std::vector<std::string> labels_;
};

struct StationaryDistribution {
  Eigen::VectorXd p;
};

// Q with Q(i, j) = r_ij off the diagonal and Q(j, j) = -r_jj.
Eigen::MatrixXd classical_generator(const FluctuatorSpec& spec);

// True when the directed transition graph is strongly connected.
bool is_irreducible(const FluctuatorSpec& spec);

// Unique p with Q p = 0, sum p = 1. Throws ZeroRates when N > 1 and every
// rate vanishes, NonErgodic when the chain is reducible.
StationaryDistribution stationary_distribution(const FluctuatorSpec& spec);

// sum_i p_i w_i over the stationary distribution.
PrecessionVector average_precession(const FluctuatorSpec& spec);

// Product chain of two independent fluctuators. State (i, j) has index
// i * b.n_states() + j and precession vector w_i(a) + w_j(b); each transition
// changes exactly one factor at that factor's rate.
FluctuatorSpec compose(const FluctuatorSpec& a, const FluctuatorSpec& b);

struct AsymptoticRates {
  double gamma_1 = 0.0;    // longitudinal (spin-flip) rate
  double gamma_phi = 0.0;  // pure dephasing rate
  double gamma_2 = 0.0;    // transverse rate, gamma_phi + gamma_1 / 2
};

// Second-order (fast-fluctuator) rates for a two-state fluctuator with
// telegraph noise of variance pa pb |dw|^2 and correlation rate r_tot:
//   gamma_phi = pa pb dw_par^2 / r_tot
//   gamma_1   = pa pb dw_perp^2 r_tot / (r_tot^2 + |<w>|^2)
// with dw = w_a - w_b split relative to <w>. When <w> vanishes the axis is
// taken along dw. Throws NotSupported for N != 2.
AsymptoticRates asymptotic_rates(const FluctuatorSpec& spec);

}  // namespace fluxspin
