#include "fluxspin/master_equation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fluxspin/errors.hpp"
#include "test_support.hpp"

using namespace fluxspin;
namespace ft = fluxspin::testing;

namespace {

FluctuatorSpec dephaser(double r, double delta) { return FluctuatorSpec::two_state(r, r, {0, 0, delta}, {0, 0, -delta}); }

}  // namespace

class DephasingOracle : public ::testing::TestWithParam<double> {};

TEST_P(DephasingOracle, coherence_matches_closed_form) {
  const double r = 1.0;
  const double delta = GetParam() * r;
  const FluctuatorSpec spec = dephaser(r, delta);
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0), Occupation::stationary());
  const auto times = linear_grid(0.0, 8.0 / r, 161);
  const auto states = propagate(g, s0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Complex got = reduce(states[k])(0, 1);
    const Complex expect = ft::dephasing_coherence(r, delta, 0.25, 0.25, times[k]);
    EXPECT_NEAR(std::abs(got), std::abs(expect), 1e-8) << "t=" << times[k];
    EXPECT_LT(std::abs(got - expect), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(Ratios, DephasingOracle, ::testing::Values(0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0));

TEST(Propagate, exceptional_point_uses_fallback_or_agrees) {
  // delta = r is the exceptional point: the coherence block is defective.
  const FluctuatorSpec spec = dephaser(1.0, 1.0);
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0), Occupation::stationary());
  const auto times = linear_grid(0.0, 5.0, 51);
  const auto states = propagate(g, s0, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_LT(std::abs(reduce(states[k])(0, 1) - ft::dephasing_coherence(1, 1, 0.25, 0.25, times[k])), 1e-8);
}

TEST(Propagate, single_state_precession) {
  const double w = 2.3;
  const FluctuatorSpec spec = FluctuatorSpec::single_state({0, 0, w});
  const auto times = linear_grid(0, 30, 301);
  const auto states = propagate(Generator(spec), initial_joint_state(spec, BlochVector::pure(1, 0, 0)), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const BlochVector b = bloch_from_density(reduce(states[k]));
    EXPECT_NEAR(b.sx, std::cos(w * times[k]), 1e-10);
    EXPECT_NEAR(b.sy, std::sin(w * times[k]), 1e-10);
    EXPECT_NEAR(b.norm(), 1.0, 1e-10);
  }
}

TEST(Propagate, identical_vectors_give_free_precession) {
  const PrecessionVector w{0.3, 0.4, 1.2};
  const FluctuatorSpec spec = FluctuatorSpec::two_state(5, 2, w, w);
  const FluctuatorSpec single = FluctuatorSpec::single_state(w);
  const auto times = linear_grid(0, 20, 41);
  const auto a = propagate(Generator(spec), initial_joint_state(spec, BlochVector::pure(1, 0, 0)), times);
  const auto b = propagate(Generator(single), initial_joint_state(single, BlochVector::pure(1, 0, 0)), times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_LT(trace_distance(reduce(a[k]), reduce(b[k])), 1e-10);
}

TEST(Propagate, rejects_bad_times) {
  const FluctuatorSpec spec = dephaser(1, 1);
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0));
  const std::vector<double> unsorted{0, 2, 1};
  const std::vector<double> negative{-1, 0};
  const std::vector<double> nan{0, std::nan("")};
  EXPECT_THROW(propagate(g, s0, unsorted), InvalidArgument);
  EXPECT_THROW(propagate(g, s0, negative), InvalidArgument);
  EXPECT_THROW(propagate(g, s0, nan), InvalidArgument);
}

TEST(Propagate, populations_follow_two_state_rate_equation) {
  const double r_ba = 3, r_ab = 0.7;
  const FluctuatorSpec spec = FluctuatorSpec::two_state(r_ba, r_ab, {1, 0, 0}, {0, 2, 0});
  const auto times = linear_grid(0, 3, 31);
  const auto states = propagate(Generator(spec), initial_joint_state(spec, BlochVector::pure(0, 0, 1)), times);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_NEAR(states[k].populations()(0), ft::two_state_population_a(r_ba, r_ab, 1.0, times[k]), 1e-12);
}

TEST(Propagate, conservation_over_random_specs) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const FluctuatorSpec spec = ft::random_spec(rng, n, 0.05, 20.0, 5.0);
    const Generator g(spec);
    for (int i = 0; i < g.dimension(); ++i) EXPECT_LE(g.eigenvalues()(i).real(), 1e-9);
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n);
    p0(0) = 1;
    const auto spin = BlochVector::pure(ft::random_vector(rng, 1).vector());
    const auto times = linear_grid(0, 10, 21);
    const auto states = propagate(g, initial_joint_state(spec, spin), times);
    for (std::size_t t = 0; t < times.size(); ++t) {
      const DensityMatrix rho = reduce(states[t]);
      EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
      EXPECT_GE(rho.eigenvalues()(0), -1e-9);
      EXPECT_LT((states[t].populations() - ft::classical_populations(spec, p0, times[t])).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(SpectralModes, reconstruct_propagation) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 20; ++k) {
    const FluctuatorSpec spec = ft::random_spec(rng, 3, 0.5, 5.0, 2.0);
    const Generator g(spec);
    const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0), Occupation::stationary());
    const SpectralModes modes = spectral_modes(g, s0);
    ASSERT_EQ(static_cast<int>(modes.modes.size()), g.dimension());
    for (std::size_t m = 1; m < modes.modes.size(); ++m)
      EXPECT_LE(std::abs(modes.modes[m - 1].eigenvalue.real()), std::abs(modes.modes[m].eigenvalue.real()) + 1e-12);
    const double t = 0.8;
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(g.dimension());
    for (const auto& mode : modes.modes) sum += mode.overlap * std::exp(mode.eigenvalue * t) * mode.vector;
    const std::vector<double> times{t};
    EXPECT_LT((sum - propagate(g, s0, times)[0].vectorized()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InitialState, occupations) {
  const FluctuatorSpec spec = FluctuatorSpec::two_state(1, 3, {}, {});
  const auto ground = initial_joint_state(spec, BlochVector::pure(0, 0, 1));
  EXPECT_EQ(ground.populations()(0), 1.0);
  EXPECT_EQ(ground.populations()(1), 0.0);
  const auto stat = initial_joint_state(spec, BlochVector::pure(0, 0, 1), Occupation::stationary());
  EXPECT_NEAR(stat.populations()(0), 0.75, 1e-14);
  Eigen::VectorXd custom(2);
  custom << 0.2, 0.8;
  EXPECT_NEAR(initial_joint_state(spec, BlochVector::pure(0, 0, 1), Occupation::from_probabilities(custom)).populations()(1), 0.8,
              1e-15);
  custom << 0.2, 0.7;
  EXPECT_THROW(initial_joint_state(spec, BlochVector::pure(0, 0, 1), Occupation::from_probabilities(custom)), InvalidArgument);
  EXPECT_THROW(initial_joint_state(spec, {0.5, 0, 0, 0.5}), InvalidArgument);
}

TEST(Grids, linear_grid_endpoints) {
  const auto g = linear_grid(1.0, 3.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 3.0);
  EXPECT_DOUBLE_EQ(g[2], 2.0);
}

TEST(Grids, default_grid_shape) {
  const auto g = default_time_grid(dephaser(1.0, 0.1));
  EXPECT_EQ(g.size(), 2000u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_GT(g.back(), 0.0);
  const auto single = default_time_grid(FluctuatorSpec::single_state({0, 0, 0}));
  EXPECT_EQ(single.back(), 1.0);
}
