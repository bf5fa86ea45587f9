#include "fluxspin/fluctuator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fluxspin/errors.hpp"
#include "fluxspin/master_equation.hpp"
#include "test_support.hpp"

using namespace fluxspin;
using fluxspin::testing::random_spec;

TEST(FluctuatorSpec, rejects_bad_input) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
  r(0, 1) = -1;
  EXPECT_THROW(FluctuatorSpec(r, {{}, {}}), InvalidArgument);
  EXPECT_THROW(FluctuatorSpec(Eigen::MatrixXd::Zero(3, 3), {{}, {}}), InvalidArgument);
  EXPECT_THROW(FluctuatorSpec(Eigen::MatrixXd::Zero(1, 1), {{1, std::nan(""), 0}}), InvalidArgument);
}

TEST(FluctuatorSpec, diagonal_is_ignored) {
  Eigen::MatrixXd r(2, 2);
  r << -5, 1, 2, 7;
  const FluctuatorSpec spec(r, {{}, {}});
  EXPECT_EQ(spec.exit_rate(0), 2);
  EXPECT_EQ(spec.exit_rate(1), 1);
}

TEST(Stationary, symmetric_two_state) {
  const auto p = stationary_distribution(FluctuatorSpec::two_state(3, 3, {}, {})).p;
  EXPECT_NEAR(p(0), 0.5, 1e-14);
  EXPECT_NEAR(p(1), 0.5, 1e-14);
}

TEST(Stationary, asymmetric_two_state) {
  const double r_ba = 2.0, r_ab = 5.0;
  const auto p = stationary_distribution(FluctuatorSpec::two_state(r_ba, r_ab, {}, {})).p;
  EXPECT_NEAR(p(0), r_ab / (r_ab + r_ba), 1e-14);
}

TEST(Stationary, three_state_nv_rates) {
  const double g = 86;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
  r(1, 0) = r(2, 0) = g / 2;
  r(0, 1) = r(0, 2) = g;
  const auto p = stationary_distribution(FluctuatorSpec(r, {{}, {}, {}})).p;
  EXPECT_NEAR(p(0), 0.5, 1e-13);
  EXPECT_NEAR(p(1), 0.25, 1e-13);
  EXPECT_NEAR(p(2), 0.25, 1e-13);
}

TEST(Stationary, errors) {
  EXPECT_THROW(stationary_distribution(FluctuatorSpec(Eigen::MatrixXd::Zero(2, 2), {{}, {}})), ZeroRates);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
  r(1, 0) = 1;
  r(0, 1) = 1;
  r(2, 1) = 1;  // state 2 is absorbing
  EXPECT_THROW(stationary_distribution(FluctuatorSpec(r, {{}, {}, {}})), NonErgodic);
  EXPECT_EQ(stationary_distribution(FluctuatorSpec::single_state({1, 0, 0})).p(0), 1.0);
}

TEST(Stationary, fixed_point_of_classical_dynamics) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const FluctuatorSpec spec = random_spec(rng, n, 0.1, 10.0, 1.0);
    const Eigen::VectorXd p = stationary_distribution(spec).p;
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    for (double t : {0.3, 5.0}) EXPECT_LT((fluxspin::testing::classical_populations(spec, p, t) - p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(AveragePrecession, identical_vectors) {
  const PrecessionVector v{0.3, -1, 2};
  const PrecessionVector avg = average_precession(FluctuatorSpec::two_state(1, 7, v, v));
  EXPECT_NEAR((avg - v).norm(), 0, 1e-14);
}

TEST(AveragePrecession, symmetric_rates_give_midpoint) {
  const PrecessionVector a{1, 2, 3}, b{-1, 0, 5};
  EXPECT_NEAR((average_precession(FluctuatorSpec::two_state(4, 4, a, b)) - (a + b) * 0.5).norm(), 0, 1e-14);
}

TEST(AveragePrecession, duration_weighted_two_state) {
  // r_ba = 2 r_ab: durations 1/r_ba : 1/r_ab = 1 : 2.
  const PrecessionVector avg = average_precession(FluctuatorSpec::two_state(2, 1, {1, 0, 0}, {0, 0, 1}));
  EXPECT_NEAR(avg.x, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(avg.y, 0.0, 1e-14);
  EXPECT_NEAR(avg.z, 2.0 / 3.0, 1e-14);
}

TEST(AveragePrecession, matches_duration_weighted_form_and_is_scale_invariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int k = 0; k < 30; ++k) {
    const double r_ba = u(rng), r_ab = u(rng);
    const PrecessionVector a = fluxspin::testing::random_vector(rng, 1), b = fluxspin::testing::random_vector(rng, 1);
    const PrecessionVector expect = (a * (1 / r_ba) + b * (1 / r_ab)) * (1 / (1 / r_ba + 1 / r_ab));
    EXPECT_NEAR((average_precession(FluctuatorSpec::two_state(r_ba, r_ab, a, b)) - expect).norm(), 0, 1e-13);
    EXPECT_NEAR((average_precession(FluctuatorSpec::two_state(9 * r_ba, 9 * r_ab, a, b)) - expect).norm(), 0, 1e-13);
  }
}

TEST(Compose, with_trivial_fluctuator_is_identity) {
  std::mt19937_64 rng(13);
  const FluctuatorSpec spec = random_spec(rng, 3, 0.5, 2, 1);
  const FluctuatorSpec c = compose(spec, FluctuatorSpec::single_state({0, 0, 0}));
  ASSERT_EQ(c.n_states(), 3);
  EXPECT_EQ(c.rates(), spec.rates());
  for (int i = 0; i < 3; ++i) EXPECT_EQ(c.omega(i), spec.omega(i));
}

TEST(Compose, two_by_three_structure) {
  std::mt19937_64 rng(14);
  const FluctuatorSpec a = random_spec(rng, 2, 0.5, 2, 1);
  const FluctuatorSpec b = random_spec(rng, 3, 0.5, 2, 1);
  const FluctuatorSpec c = compose(a, b);
  ASSERT_EQ(c.n_states(), 6);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int s = i * 3 + j;
      int exits = 0;
      for (int t = 0; t < 6; ++t) exits += c.rate(t, s) > 0;
      int expect = 0;
      for (int t = 0; t < 2; ++t) expect += a.rate(t, i) > 0;
      for (int t = 0; t < 3; ++t) expect += b.rate(t, j) > 0;
      EXPECT_EQ(exits, expect);
      EXPECT_NEAR((c.omega(s) - (a.omega(i) + b.omega(j))).norm(), 0, 1e-15);
      EXPECT_NEAR(c.exit_rate(s), a.exit_rate(i) + b.exit_rate(j), 1e-14);
    }
  }
}

TEST(Compose, associative_up_to_relabeling) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 5; ++k) {
    const FluctuatorSpec a = random_spec(rng, 2, 0.5, 2, 1);
    const FluctuatorSpec b = random_spec(rng, 2, 0.5, 2, 1);
    const FluctuatorSpec c = random_spec(rng, 3, 0.5, 2, 1);
    auto spectrum = [](const FluctuatorSpec& s) {
      Eigen::EigenSolver<Eigen::MatrixXd> solver(classical_generator(s));
      std::vector<std::complex<double>> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + s.n_states());
      std::sort(ev.begin(), ev.end(), [](auto x, auto y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
      return ev;
    };
    const auto left = spectrum(compose(compose(a, b), c));
    const auto right = spectrum(compose(a, compose(b, c)));
    ASSERT_EQ(left.size(), right.size());
    for (std::size_t i = 0; i < left.size(); ++i) EXPECT_LT(std::abs(left[i] - right[i]), 1e-10);
  }
}

TEST(AsymptoticRates, identical_vectors_give_zero) {
  const auto r = asymptotic_rates(FluctuatorSpec::two_state(1, 2, {0, 0, 1}, {0, 0, 1}));
  EXPECT_EQ(r.gamma_1, 0);
  EXPECT_EQ(r.gamma_phi, 0);
  EXPECT_EQ(r.gamma_2, 0);
}

TEST(AsymptoticRates, symmetric_parallel) {
  const double r = 100, dw = 1.0, w0 = 50;
  const auto rates = asymptotic_rates(FluctuatorSpec::two_state(r, r, {0, 0, w0 + dw / 2}, {0, 0, w0 - dw / 2}));
  EXPECT_NEAR(rates.gamma_phi, dw * dw / (8 * r), 1e-15);
  EXPECT_NEAR(rates.gamma_1, 0.0, 1e-18);
  // Exact coherence-block eigenvalue -r + sqrt(r^2 - (dw/2)^2), expanded.
  const double exact = r - std::sqrt(r * r - dw * dw / 4);
  EXPECT_NEAR(rates.gamma_phi / exact, 1.0, 1e-4);
}

TEST(AsymptoticRates, inversely_proportional_to_rate) {
  const PrecessionVector a{0.1, 0, 1}, b{-0.2, 0, 0.7};
  const auto slow = asymptotic_rates(FluctuatorSpec::two_state(10, 30, a, b));
  const auto fast = asymptotic_rates(FluctuatorSpec::two_state(20, 60, a, b));
  EXPECT_NEAR(fast.gamma_phi / slow.gamma_phi, 0.5, 1e-12);
}

TEST(AsymptoticRates, zero_mean_uses_difference_axis) {
  const auto r = asymptotic_rates(FluctuatorSpec::two_state(5, 5, {0.1, 0, 0}, {-0.1, 0, 0}));
  EXPECT_EQ(r.gamma_1, 0);
  EXPECT_NEAR(r.gamma_phi, 0.25 * 0.04 / 10, 1e-16);
}

TEST(AsymptoticRates, only_two_state) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(asymptotic_rates(FluctuatorSpec(r, {{}, {}, {}})), NotSupported);
  EXPECT_THROW(asymptotic_rates(FluctuatorSpec::single_state({})), NotSupported);
}
