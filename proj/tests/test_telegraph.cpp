#include "fluxspin/telegraph.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fluxspin/seeding.hpp"
#include "test_support.hpp"

using namespace fluxspin;
namespace ft = fluxspin::testing;

TEST(Rotation, about_z_matches_closed_form) {
  EXPECT_LT((rotation({0, 0, 2.0}, 0.3) - ft::rotation_about_z(0.6)).norm(), 1e-14);
  EXPECT_LT((rotation({1.5, 0, 0}, 1.0) - ft::rotation_about_x(1.5)).norm(), 1e-14);
  EXPECT_EQ(rotation({0, 0, 0}, 5.0), Eigen::Matrix3d::Identity());
}

TEST(Rotation, composes_and_solves_precession_equation) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    const PrecessionVector w = ft::random_vector(rng, 2.0);
    EXPECT_LT((rotation(w, 0.4) * rotation(w, 0.7) - rotation(w, 1.1)).norm(), 1e-12);
    const Eigen::Vector3d s(0.2, -0.5, 0.8);
    const double h = 1e-6;
    const Eigen::Vector3d deriv = (rotation(w, h) * s - rotation(w, -h) * s) / (2 * h);
    EXPECT_LT((deriv - w.vector().cross(s)).norm(), 1e-7);
  }
}

TEST(Trajectory, dwells_sum_to_duration_and_deterministic) {
  std::mt19937_64 rng(32);
  const FluctuatorSpec spec = ft::random_spec(rng, 4, 0.5, 3.0, 1.0);
  const Trajectory a = sample_trajectory(spec, 0, 12.5, 99);
  const Trajectory b = sample_trajectory(spec, 0, 12.5, 99);
  double total = 0;
  for (const auto& s : a.segments) total += s.dwell;
  EXPECT_NEAR(total, 12.5, 1e-12);
  ASSERT_EQ(a.segments.size(), b.segments.size());
  for (std::size_t k = 0; k < a.segments.size(); ++k) {
    EXPECT_EQ(a.segments[k].state, b.segments[k].state);
    EXPECT_EQ(a.segments[k].dwell, b.segments[k].dwell);
  }
  for (std::size_t k = 1; k < a.segments.size(); ++k) EXPECT_NE(a.segments[k].state, a.segments[k - 1].state);
  EXPECT_FALSE(a.absorbed);
}

TEST(Trajectory, jump_counts_are_poisson) {
  // Symmetric two-state chain: every state leaves at rate r, so the number of
  // jumps in [0, T] is Poisson(r T).
  const double r = 2.0, duration = 5.0;
  const FluctuatorSpec spec = FluctuatorSpec::two_state(r, r, {}, {});
  const int n = 4000;
  double sum = 0, sum_sq = 0;
  for (int k = 0; k < n; ++k) {
    const auto jumps = static_cast<double>(sample_trajectory(spec, 0, duration, derive_seed(7, k)).segments.size() - 1);
    sum += jumps;
    sum_sq += jumps * jumps;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double lambda = r * duration;
  EXPECT_NEAR(mean, lambda, 5 * std::sqrt(lambda / n));
  EXPECT_NEAR(var / lambda, 1.0, 0.1);
}

TEST(Trajectory, absorbing_state) {
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(2, 2);
  rates(1, 0) = 5.0;
  const FluctuatorSpec spec(rates, {{}, {}});
  const Trajectory t = sample_trajectory(spec, 0, 100.0, 3);
  EXPECT_TRUE(t.absorbed);
  EXPECT_EQ(t.segments.back().state, 1);
  EXPECT_FALSE(sample_trajectory(FluctuatorSpec::single_state({}), 0, 1.0, 3).absorbed);
}

TEST(EvolveBloch, grid_matches_final_and_segments) {
  std::mt19937_64 rng(33);
  const FluctuatorSpec spec = ft::random_spec(rng, 3, 1.0, 4.0, 3.0);
  const Trajectory traj = sample_trajectory(spec, 0, 4.0, 5);
  const BlochVector b0 = BlochVector::pure(1, 0, 0);
  const auto grid = linear_grid(0, 4.0, 17);
  const auto series = evolve_bloch(traj, b0, spec.omegas(), grid);
  ASSERT_EQ(series.size(), grid.size());
  EXPECT_EQ(series.front(), b0);
  const BlochVector end = evolve_bloch(traj, b0, spec.omegas());
  EXPECT_LT((series.back().vector() - end.vector()).norm(), 1e-12);
  Eigen::Vector3d manual = b0.vector();
  for (const auto& s : traj.segments) manual = rotation(spec.omega(s.state), s.dwell) * manual;
  EXPECT_LT((manual - end.vector()).norm(), 1e-12);
  for (const auto& b : series) EXPECT_NEAR(b.norm(), 1.0, 1e-12);
}

TEST(Ensemble, bit_identical_across_worker_counts) {
  std::mt19937_64 rng(34);
  const FluctuatorSpec spec = ft::random_spec(rng, 3, 1.0, 4.0, 2.0);
  const auto grid = linear_grid(0, 3, 13);
  const auto a = ensemble_average(spec, BlochVector::pure(1, 0, 0), Occupation::stationary(), 500, grid, 77, 1);
  const auto b = ensemble_average(spec, BlochVector::pure(1, 0, 0), Occupation::stationary(), 500, grid, 77, 7);
  ASSERT_EQ(a.mean.size(), b.mean.size());
  for (std::size_t k = 0; k < a.mean.size(); ++k) {
    EXPECT_EQ(a.mean[k], b.mean[k]);
    EXPECT_EQ(a.standard_error[k], b.standard_error[k]);
  }
  const auto c = ensemble_average(spec, BlochVector::pure(1, 0, 0), Occupation::stationary(), 500, grid, 78, 1);
  EXPECT_NE(a.mean.back(), c.mean.back());
}

TEST(Ensemble, agrees_with_master_equation) {
  std::mt19937_64 rng(35);
  const FluctuatorSpec spec = ft::random_spec(rng, 3, 0.5, 3.0, 2.0);
  const auto grid = linear_grid(0, 3, 16);
  const BlochVector b0 = BlochVector::pure(1, 0, 0);
  const auto mc = ensemble_average(spec, b0, Occupation::ground_only(), 4000, grid, 5, 0);
  const auto me = propagate(Generator(spec), initial_joint_state(spec, b0), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Eigen::Vector3d exact = bloch_from_density(reduce(me[k])).vector();
    for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(mc.mean[k](c) - exact(c)), 4 * mc.standard_error[k](c) + 1e-12);
  }
}

TEST(Seeding, derive_seed_is_stable_and_spreads) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_NE(derive_seed(1, 2, 0), derive_seed(1, 2, 1));
}
