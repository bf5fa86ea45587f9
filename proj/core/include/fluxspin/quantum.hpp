#pragma once

// Spin-1/2 primitives. Conventions used throughout the library:
//   * spin operators are I = sigma/2, so a Bloch vector precesses about a
//     precession vector w at angular frequency |w| (ds/dt = w x s);
//   * density matrices are vectorised in the fixed order
//     (rho_11, rho_12, rho_21, rho_22);
//   * time is in microseconds, frequencies and rates in 1/us (rad/us).

#include <complex>

#include <Eigen/Dense>

namespace fluxspin {

using Complex = std::complex<double>;
using Superoperator = Eigen::Matrix4cd;

// Angular velocity of Larmor precession, rad/us.
struct PrecessionVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr PrecessionVector() = default;
  constexpr PrecessionVector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit PrecessionVector(const Eigen::Vector3d& v) : x(v.x()), y(v.y()), z(v.z()) {}

  Eigen::Vector3d vector() const { return {x, y, z}; }
  double norm() const { return vector().norm(); }
  double dot(const PrecessionVector& o) const { return x * o.x + y * o.y + z * o.z; }
  bool is_finite() const { return vector().allFinite(); }

  PrecessionVector& operator+=(const PrecessionVector& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  PrecessionVector& operator-=(const PrecessionVector& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  PrecessionVector& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend PrecessionVector operator+(PrecessionVector a, const PrecessionVector& b) { return a += b; }
  friend PrecessionVector operator-(PrecessionVector a, const PrecessionVector& b) { return a -= b; }
  friend PrecessionVector operator*(PrecessionVector a, double s) { return a *= s; }
  friend PrecessionVector operator*(double s, PrecessionVector a) { return a *= s; }
  friend PrecessionVector operator-(const PrecessionVector& a) { return {-a.x, -a.y, -a.z}; }
  friend bool operator==(const PrecessionVector&, const PrecessionVector&) = default;
};

// Bloch vector together with the trace w of the density matrix it came from.
struct BlochVector {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  double w = 1.0;

  Eigen::Vector3d vector() const { return {sx, sy, sz}; }
  double norm() const { return vector().norm(); }

  // Pure state along the given direction; the direction is normalised.
  static BlochVector pure(const Eigen::Vector3d& direction);
  static BlochVector pure(double x, double y, double z) { return pure(Eigen::Vector3d(x, y, z)); }

  friend bool operator==(const BlochVector&, const BlochVector&) = default;
};

// 2x2 density matrix (possibly sub-normalised). Hermiticity is imposed on
// construction: the input is symmetrised after checking that it is Hermitian
// within `tolerance`.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;

  DensityMatrix() : m_(Eigen::Matrix2cd::Zero()) {}
  explicit DensityMatrix(const Eigen::Matrix2cd& m, double tolerance = kHermitianTolerance);

  // Entries in the order (rho_11, rho_12, rho_21, rho_22).
  static DensityMatrix from_vector(const Eigen::Vector4cd& v,
                                   double tolerance = kHermitianTolerance);

  const Eigen::Matrix2cd& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }
  Eigen::Vector4cd vectorized() const;
  double trace() const { return m_.trace().real(); }

  // Ascending.
  Eigen::Vector2d eigenvalues() const;

  // trace in [0, 1] and positive semidefinite, both within `tolerance`.
  bool is_physical(double tolerance = 1e-12) const;

  DensityMatrix& operator+=(const DensityMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  friend DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b) { return a += b; }
  friend DensityMatrix operator*(double s, const DensityMatrix& a) {
    DensityMatrix r = a;
    r.m_ *= s;
    return r;
  }

 private:
  Eigen::Matrix2cd m_;
};

// H = (w_x sigma_x + w_y sigma_y + w_z sigma_z) / 2.
Eigen::Matrix2cd hamiltonian(const PrecessionVector& omega);

// L[w] = -i (H (x) 1 - 1 (x) H*), acting on the vectorised density matrix.
// Linear in w.
Superoperator liouvillian(const PrecessionVector& omega);

// sx = rho_12 + rho_21, sy = i (rho_12 - rho_21), sz = rho_11 - rho_22.
BlochVector bloch_from_density(const DensityMatrix& rho);

// Throws InvalidArgument when |s| > w (beyond 1e-12) or w < 0.
DensityMatrix density_from_bloch(const BlochVector& b);

// Half the trace norm of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace fluxspin
