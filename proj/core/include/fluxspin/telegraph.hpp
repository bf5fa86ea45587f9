#pragma once

// Monte Carlo picture of the same model: sample the fluctuator as a
// continuous-time Markov chain and rotate a classical Bloch vector about the
// precession vector of whichever state the chain occupies.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fluxspin/fluctuator.hpp"
#include "fluxspin/master_equation.hpp"
#include "fluxspin/quantum.hpp"

namespace fluxspin {

struct Segment {
  int state = 0;
  double dwell = 0.0;  // us
};

// Piecewise-constant fluctuator history on [0, duration]. The final dwell is
// truncated at `duration`, so the dwell times sum to it exactly.
struct Trajectory {
  std::vector<Segment> segments;
  double duration = 0.0;
  std::uint64_t seed = 0;
  // The chain reached a state with zero exit rate before `duration`.
  bool absorbed = false;
};

// Dwell ~ Exponential(r_jj), next state i with probability r_ij / r_jj.
// Deterministic in `seed`.
Trajectory sample_trajectory(const FluctuatorSpec& spec, int start_state, double duration, std::uint64_t seed);

// Rotation by |w| t about w (right-handed), i.e. the flow of ds/dt = w x s.
Eigen::Matrix3d rotation(const PrecessionVector& omega, double t);

// Bloch vector at the end of the trajectory.
BlochVector evolve_bloch(const Trajectory& traj, const BlochVector& b0, std::span<const PrecessionVector> omegas);

// Bloch vector at each time of a sorted grid inside [0, duration]. Segments
// are split exactly at grid times.
std::vector<BlochVector> evolve_bloch(const Trajectory& traj, const BlochVector& b0,
                                      std::span<const PrecessionVector> omegas, std::span<const double> grid);

struct EnsembleResult {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> mean;
  std::vector<Eigen::Vector3d> standard_error;
  std::size_t n_trajectories = 0;
  std::size_t n_absorbed = 0;
  std::uint64_t seed = 0;
};

// Mean and standard error of the Bloch vector over n_traj trajectories.
// Trajectory k draws from derive_seed(seed, k), and partial sums are reduced
// in a fixed block order, so the result is bit-identical for any worker count.
EnsembleResult ensemble_average(const FluctuatorSpec& spec, const BlochVector& b0, const Occupation& start,
                                std::size_t n_traj, std::span<const double> grid, std::uint64_t seed,
                                unsigned workers = 0);

}  // namespace fluxspin
