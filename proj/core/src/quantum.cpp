#include "fluxspin/quantum.hpp"

#include <cmath>
#include <string>

#include "fluxspin/errors.hpp"

namespace fluxspin {

namespace {

constexpr Complex kI{0.0, 1.0};

// Kronecker product in the (row-major) vectorisation order used for rho.
Superoperator kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Superoperator out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace

BlochVector BlochVector::pure(const Eigen::Vector3d& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("pure state needs a nonzero finite direction");
  const Eigen::Vector3d u = direction / n;
  return {u.x(), u.y(), u.z(), 1.0};
}

DensityMatrix::DensityMatrix(const Eigen::Matrix2cd& m, double tolerance) {
  if (!m.allFinite()) throw InvalidArgument("density matrix has non-finite entries");
  const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (skew > 2.0 * tolerance)
    throw InvalidArgument("density matrix is not Hermitian (deviation " + std::to_string(skew / 2.0) + ")");
  m_ = 0.5 * (m + m.adjoint());
}

DensityMatrix DensityMatrix::from_vector(const Eigen::Vector4cd& v, double tolerance) {
  Eigen::Matrix2cd m;
  m << v(0), v(1), v(2), v(3);
  return DensityMatrix(m, tolerance);
}

Eigen::Vector4cd DensityMatrix::vectorized() const {
  return {m_(0, 0), m_(0, 1), m_(1, 0), m_(1, 1)};
}

Eigen::Vector2d DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

bool DensityMatrix::is_physical(double tolerance) const {
  const double tr = trace();
  if (tr < -tolerance || tr > 1.0 + tolerance) return false;
  return eigenvalues()(0) >= -tolerance;
}

Eigen::Matrix2cd hamiltonian(const PrecessionVector& omega) {
  Eigen::Matrix2cd h;
  h << Complex(omega.z, 0.0), Complex(omega.x, -omega.y),
      Complex(omega.x, omega.y), Complex(-omega.z, 0.0);
  return 0.5 * h;
}

Superoperator liouvillian(const PrecessionVector& omega) {
  const Eigen::Matrix2cd h = hamiltonian(omega);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return -kI * (kron(h, id) - kron(id, h.conjugate()));
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
  const Complex r12 = rho(0, 1);
  const Complex r21 = rho(1, 0);
  return {(r12 + r21).real(), (kI * (r12 - r21)).real(), (rho(0, 0) - rho(1, 1)).real(), rho.trace()};
}

DensityMatrix density_from_bloch(const BlochVector& b) {
  if (!b.vector().allFinite() || !std::isfinite(b.w)) throw InvalidArgument("Bloch vector has non-finite entries");
  if (b.w < 0.0) throw InvalidArgument("Bloch vector weight is negative");
  if (b.norm() > b.w + 1e-12) throw InvalidArgument("Bloch vector longer than its weight (unphysical state)");
  Eigen::Matrix2cd m;
  m << Complex(b.w + b.sz, 0.0), Complex(b.sx, -b.sy),
      Complex(b.sx, b.sy), Complex(b.w - b.sz, 0.0);
  return DensityMatrix(0.5 * m);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const Eigen::Matrix2cd d = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(d, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace fluxspin
