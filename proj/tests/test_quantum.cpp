#include "fluxspin/quantum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "fluxspin/errors.hpp"
#include "test_support.hpp"

using namespace fluxspin;

namespace {

Eigen::Vector3d evolve_pure(const PrecessionVector& w, const Eigen::Vector3d& dir, double t) {
  const DensityMatrix rho = density_from_bloch(BlochVector::pure(dir));
  const Eigen::Vector4cd v = (liouvillian(w) * t).exp() * rho.vectorized();
  return bloch_from_density(DensityMatrix::from_vector(v, 1e-10)).vector();
}

}  // namespace

TEST(Hamiltonian, zero_vector_gives_zero_matrix) {
  EXPECT_EQ(hamiltonian({0, 0, 0}), Eigen::Matrix2cd::Zero());
}

TEST(Hamiltonian, z_vector_is_diagonal) {
  const Eigen::Matrix2cd h = hamiltonian({0, 0, 3.0});
  EXPECT_EQ(h(0, 0), Complex(1.5, 0));
  EXPECT_EQ(h(1, 1), Complex(-1.5, 0));
  EXPECT_EQ(h(0, 1), Complex(0, 0));
}

TEST(Hamiltonian, x_vector_precesses_about_x) {
  const double w = 2.0;
  const Eigen::Matrix2cd h = hamiltonian({w, 0, 0});
  EXPECT_EQ(h(0, 1), Complex(w / 2, 0));
  EXPECT_EQ(h(1, 0), Complex(w / 2, 0));
  // Closed-form rotation about x: x stays, z -> (0, -sin, cos).
  const double t = 0.37;
  EXPECT_LT((evolve_pure({w, 0, 0}, {1, 0, 0}, t) - Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);
  const Eigen::Vector3d expect = fluxspin::testing::rotation_about_x(w * t) * Eigen::Vector3d(0, 0, 1);
  EXPECT_LT((evolve_pure({w, 0, 0}, {0, 0, 1}, t) - expect).norm(), 1e-12);
}

TEST(Hamiltonian, traceless_and_hermitian) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Matrix2cd h = hamiltonian(fluxspin::testing::random_vector(rng, 3.0));
    EXPECT_LT(std::abs(h.trace()), 1e-15);
    EXPECT_LT((h - h.adjoint()).norm(), 1e-15);
  }
}

TEST(Liouvillian, zero_vector) { EXPECT_EQ(liouvillian({0, 0, 0}), Superoperator::Zero()); }

TEST(Liouvillian, z_spectrum) {
  const double w = 1.7;
  Eigen::ComplexEigenSolver<Superoperator> solver(liouvillian({0, 0, w}));
  std::vector<double> im;
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(solver.eigenvalues()(k).real(), 0.0, 1e-14);
    im.push_back(solver.eigenvalues()(k).imag());
  }
  std::sort(im.begin(), im.end());
  EXPECT_NEAR(im[0], -w, 1e-14);
  EXPECT_NEAR(im[1], 0.0, 1e-14);
  EXPECT_NEAR(im[2], 0.0, 1e-14);
  EXPECT_NEAR(im[3], w, 1e-14);
}

TEST(Liouvillian, linearity) {
  const Superoperator sum = liouvillian({1, 2, 3}) + liouvillian({4, 5, 6});
  EXPECT_LT((sum - liouvillian({5, 7, 9})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Liouvillian, trace_preserving_rows) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Superoperator l = liouvillian(fluxspin::testing::random_vector(rng, 5.0));
    for (int c = 0; c < 4; ++c) EXPECT_LT(std::abs(l(0, c) + l(3, c)), 1e-12);
  }
}

TEST(Liouvillian, pure_state_norm_constant_over_many_periods) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const PrecessionVector w = fluxspin::testing::random_vector(rng, 2.0);
    const Eigen::Vector3d dir = fluxspin::testing::random_vector(rng, 1.0).vector();
    const double period = 2 * std::numbers::pi / w.norm();
    for (double t = 0; t <= 100 * period; t += 7.3 * period)
      EXPECT_NEAR(evolve_pure(w, dir, t).norm(), 1.0, 1e-10);
  }
}

TEST(Bloch, diagonal_state) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = 1;
  const BlochVector b = bloch_from_density(DensityMatrix(m));
  EXPECT_EQ(b, (BlochVector{0, 0, 1, 1}));
}

TEST(Bloch, plus_x_state) {
  Eigen::Matrix2cd m;
  m << 0.5, 0.5, 0.5, 0.5;
  const BlochVector b = bloch_from_density(DensityMatrix(m));
  EXPECT_NEAR(b.sx, 1, 1e-15);
  EXPECT_NEAR(b.sy, 0, 1e-15);
  EXPECT_NEAR(b.sz, 0, 1e-15);
  EXPECT_NEAR(b.w, 1, 1e-15);
}

TEST(Bloch, round_trip_random_states) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    // Random PSD matrix with trace in (0, 1].
    Eigen::Matrix2cd a = Eigen::Matrix2cd::Random();
    Eigen::Matrix2cd m = a * a.adjoint();
    m *= u(rng) / m.trace().real();
    const DensityMatrix rho(m);
    const DensityMatrix back = density_from_bloch(bloch_from_density(rho));
    EXPECT_LT((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_TRUE(rho.is_physical());
  }
}

TEST(Bloch, rejects_unphysical_vector) {
  EXPECT_THROW(density_from_bloch({1.0, 0.5, 0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(density_from_bloch({0.0, 0.0, 0.0, -0.1}), InvalidArgument);
  EXPECT_NO_THROW(density_from_bloch({0.3, 0.0, 0.0, 0.3}));
}

TEST(DensityMatrix, rejects_non_hermitian_input) {
  Eigen::Matrix2cd m;
  m << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix{m}, InvalidArgument);
  m(1, 0) = 0.1 + 1e-14;
  const DensityMatrix rho(m);
  EXPECT_EQ(rho(1, 0), std::conj(rho(0, 1)));
}

TEST(DensityMatrix, trace_distance_of_orthogonal_states) {
  EXPECT_NEAR(trace_distance(density_from_bloch(BlochVector::pure(0, 0, 1)), density_from_bloch(BlochVector::pure(0, 0, -1))), 1.0,
              1e-15);
}
