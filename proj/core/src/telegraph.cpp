#include "fluxspin/telegraph.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fluxspin/errors.hpp"
#include "fluxspin/parallel.hpp"
#include "fluxspin/seeding.hpp"

namespace fluxspin {

namespace {

constexpr std::size_t kBlockSize = 64;

int draw_index(const Eigen::VectorXd& weights, double total, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, total);
  const double u = uniform(rng);
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    acc += weights(i);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("time grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || grid[k] < 0.0) throw InvalidArgument("time grid must be finite and non-negative");
    if (k > 0 && grid[k] < grid[k - 1]) throw InvalidArgument("time grid must be sorted ascending");
  }
}

}  // namespace

Trajectory sample_trajectory(const FluctuatorSpec& spec, int start_state, double duration, std::uint64_t seed) {
  if (start_state < 0 || start_state >= spec.n_states()) throw InvalidArgument("start state out of range");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("trajectory duration must be positive");

  Trajectory traj;
  traj.duration = duration;
  traj.seed = seed;
  std::mt19937_64 rng(seed);
  int state = start_state;
  double elapsed = 0.0;
  while (true) {
    const double exit = spec.exit_rate(state);
    if (exit <= 0.0) {
      traj.absorbed = spec.n_states() > 1;
      traj.segments.push_back({state, duration - elapsed});
      break;
    }
    std::exponential_distribution<double> dwell_dist(exit);
    double dwell = dwell_dist(rng);
    while (dwell == 0.0) dwell = dwell_dist(rng);
    if (elapsed + dwell >= duration) {
      traj.segments.push_back({state, duration - elapsed});
      break;
    }
    traj.segments.push_back({state, dwell});
    elapsed += dwell;
    state = draw_index(spec.rates().col(state), exit, rng);
  }
  return traj;
}

Eigen::Matrix3d rotation(const PrecessionVector& omega, double t) {
  const double rate = omega.norm();
  if (rate == 0.0 || t == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(rate * t, omega.vector() / rate).toRotationMatrix();
}

BlochVector evolve_bloch(const Trajectory& traj, const BlochVector& b0, std::span<const PrecessionVector> omegas) {
  const double grid[] = {traj.duration};
  return evolve_bloch(traj, b0, omegas, grid).front();
}

std::vector<BlochVector> evolve_bloch(const Trajectory& traj, const BlochVector& b0,
                                      std::span<const PrecessionVector> omegas, std::span<const double> grid) {
  check_grid(grid);
  if (grid.back() > traj.duration * (1.0 + 1e-12)) throw InvalidArgument("grid extends past trajectory duration");
  std::vector<BlochVector> out;
  out.reserve(grid.size());
  Eigen::Vector3d v = b0.vector();
  double start = 0.0;
  std::size_t k = 0;
  for (std::size_t s = 0; s < traj.segments.size() && k < grid.size(); ++s) {
    const Segment& seg = traj.segments[s];
    if (seg.state < 0 || static_cast<std::size_t>(seg.state) >= omegas.size())
      throw InvalidArgument("trajectory visits a state without a precession vector");
    const PrecessionVector& w = omegas[static_cast<std::size_t>(seg.state)];
    const double end = s + 1 == traj.segments.size() ? traj.duration : start + seg.dwell;
    for (; k < grid.size() && (grid[k] <= end || s + 1 == traj.segments.size()); ++k) {
      const Eigen::Vector3d r = rotation(w, grid[k] - start) * v;
      out.push_back({r.x(), r.y(), r.z(), b0.w});
    }
    v = rotation(w, seg.dwell) * v;
    start = end;
  }
  return out;
}

EnsembleResult ensemble_average(const FluctuatorSpec& spec, const BlochVector& b0, const Occupation& start,
                                std::size_t n_traj, std::span<const double> grid, std::uint64_t seed,
                                unsigned workers) {
  if (n_traj < 2) throw InvalidArgument("ensemble needs at least two trajectories");
  check_grid(grid);
  const Eigen::VectorXd p = occupation_probabilities(spec, start);
  const bool fixed_start = start.kind == Occupation::Kind::GroundOnly;
  const double duration = grid.back();
  const std::size_t n_times = grid.size();

  struct Block {
    std::vector<Eigen::Vector3d> sum;
    std::vector<Eigen::Vector3d> sum_sq;
    std::size_t absorbed = 0;
  };
  const std::size_t n_blocks = (n_traj + kBlockSize - 1) / kBlockSize;
  std::vector<Block> blocks(n_blocks);

  parallel_for(n_blocks, workers, [&](std::size_t b) {
    Block& block = blocks[b];
    block.sum.assign(n_times, Eigen::Vector3d::Zero());
    block.sum_sq.assign(n_times, Eigen::Vector3d::Zero());
    const std::size_t end = std::min(n_traj, (b + 1) * kBlockSize);
    for (std::size_t k = b * kBlockSize; k < end; ++k) {
      int state = 0;
      if (!fixed_start) {
        std::mt19937_64 start_rng(derive_seed(seed, k, 1));
        state = draw_index(p, p.sum(), start_rng);
      }
      std::vector<BlochVector> series;
      if (duration > 0.0) {
        const Trajectory traj = sample_trajectory(spec, state, duration, derive_seed(seed, k));
        block.absorbed += traj.absorbed ? 1 : 0;
        series = evolve_bloch(traj, b0, spec.omegas(), grid);
      } else {
        series.assign(n_times, b0);
      }
      for (std::size_t t = 0; t < n_times; ++t) {
        const Eigen::Vector3d v = series[t].vector();
        block.sum[t] += v;
        block.sum_sq[t] += v.cwiseProduct(v);
      }
    }
  });

  EnsembleResult result;
  result.times.assign(grid.begin(), grid.end());
  result.n_trajectories = n_traj;
  result.seed = seed;
  std::vector<Eigen::Vector3d> sum(n_times, Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> sum_sq(n_times, Eigen::Vector3d::Zero());
  for (const Block& block : blocks) {
    result.n_absorbed += block.absorbed;
    for (std::size_t t = 0; t < n_times; ++t) {
      sum[t] += block.sum[t];
      sum_sq[t] += block.sum_sq[t];
    }
  }
  const double n = static_cast<double>(n_traj);
  result.mean.resize(n_times);
  result.standard_error.resize(n_times);
  for (std::size_t t = 0; t < n_times; ++t) {
    const Eigen::Vector3d mean = sum[t] / n;
    const Eigen::Vector3d var = ((sum_sq[t] - n * mean.cwiseProduct(mean)) / (n - 1.0)).cwiseMax(0.0);
    result.mean[t] = mean;
    result.standard_error[t] = (var / n).cwiseSqrt();
  }
  return result;
}

}  // namespace fluxspin
