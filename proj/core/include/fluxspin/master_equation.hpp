#pragma once

// Exact joint dynamics of the spin and the fluctuator. The state is the list
// of conditional density matrices rho_i (spin density matrix jointly with
// "fluctuator in state i"); stacked, the 4N-vector obeys
//   d/dt rho_i = (L[w_i] - r_ii) rho_i + sum_{j != i} r_ij rho_j.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fluxspin/fluctuator.hpp"
#include "fluxspin/quantum.hpp"

namespace fluxspin {

// Initial occupation of the fluctuator states.
struct Occupation {
  enum class Kind { GroundOnly, Stationary, Custom };

  Kind kind = Kind::GroundOnly;
  Eigen::VectorXd custom;  // used when kind == Custom

  static Occupation ground_only() { return {}; }
  static Occupation stationary() { return {Kind::Stationary, {}}; }
  static Occupation from_probabilities(Eigen::VectorXd p) { return {Kind::Custom, std::move(p)}; }
};

// Resolves an Occupation to a probability vector. Custom vectors must have N
// non-negative entries summing to 1 (within 1e-9).
Eigen::VectorXd occupation_probabilities(const FluctuatorSpec& spec, const Occupation& occupation);

struct JointState {
  std::vector<DensityMatrix> rhos;
  double time = 0.0;

  int n_states() const { return static_cast<int>(rhos.size()); }
  Eigen::VectorXcd vectorized() const;
  // Occupation probabilities tr(rho_i).
  Eigen::VectorXd populations() const;
  double total_trace() const { return populations().sum(); }

  static JointState from_vector(const Eigen::VectorXcd& v, double time,
                                double tolerance = DensityMatrix::kHermitianTolerance);
};

// The 4N x 4N generator with its eigendecomposition, computed once at
// construction. Immutable afterwards and safe to share between threads.
class Generator {
 public:
  static constexpr double kConditionLimit = 1e8;

  explicit Generator(FluctuatorSpec spec);

  const FluctuatorSpec& spec() const { return spec_; }
  int n_states() const { return spec_.n_states(); }
  int dimension() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }
  // Columns are unit-norm right eigenvectors.
  const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }
  const Eigen::MatrixXcd& inverse_eigenvectors() const { return inverse_eigenvectors_; }
  // 2-norm condition number of the eigenvector matrix.
  double condition_number() const { return condition_number_; }
  bool well_conditioned() const { return condition_number_ <= kConditionLimit; }

 private:
  FluctuatorSpec spec_;
  Eigen::MatrixXcd matrix_;
  Eigen::VectorXcd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
  Eigen::MatrixXcd inverse_eigenvectors_;
  double condition_number_ = 0.0;
};

Generator build_generator(const FluctuatorSpec& spec);

// Tolerance on Hermiticity drift of propagated conditional density matrices.
inline constexpr double kPropagationTolerance = 1e-9;

// s(t_k) = exp(G t_k) s0 for every t_k. Uses the cached eigendecomposition
// and falls back to a scaling-and-squaring exponential per time point when
// the eigenvectors are ill-conditioned. The eigen route is checked against the
// exponential at the last time point. Throws NumericalDegeneracy when the two
// disagree by more than 1e-7 or when Hermiticity drifts beyond 1e-9, and
// InvalidArgument when times are unsorted, negative or non-finite.
std::vector<JointState> propagate(const Generator& g, const JointState& s0, std::span<const double> times);

// Reduced spin density matrix, sum_i rho_i.
DensityMatrix reduce(const JointState& s);

struct SpectralMode {
  Complex eigenvalue;
  Eigen::VectorXcd vector;  // right eigenvector, unit norm
  Complex overlap;          // coefficient of s0 along this eigenvector
};

// Eigenpairs sorted by |Re lambda| ascending, so s0(t) = sum_k overlap_k e^{lambda_k t} vector_k.
struct SpectralModes {
  std::vector<SpectralMode> modes;
};

// Throws NumericalDegeneracy when the eigenvector matrix condition number
// exceeds Generator::kConditionLimit.
SpectralModes spectral_modes(const Generator& g, const JointState& s0);

// rho_i = p_i * density_from_bloch(spin). The spin must be normalised (w = 1).
JointState initial_joint_state(const FluctuatorSpec& spec, const BlochVector& spin,
                               const Occupation& occupation = Occupation::ground_only());

// n evenly spaced points on [t0, t1], endpoints included.
std::vector<double> linear_grid(double t0, double t1, int n);

// Default analysis grid: 2000 points on [0, min(10 / gamma_est, 500 / r)],
// r the largest exit rate and gamma_est the asymptotic transverse rate when
// one is available. Single-state specs span 100 Larmor periods.
std::vector<double> default_time_grid(const FluctuatorSpec& spec);

}  // namespace fluxspin
