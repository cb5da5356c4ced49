#pragma once

#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

namespace dirand {

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace num {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shared numerical tolerances. Every module reads its defaults from here.
struct Tolerances {
  double symmetry = 1e-12;
  double trace = 1e-12;
  double psd = 1e-10;
  double probability = 1e-10;
  double no_signaling = 1e-9;
  double projector = 1e-12;
  double eig_reconstruction = 1e-10;
  double solve_residual = 1e-9;
  double max_condition = 1e13;
};

inline constexpr Tolerances kTol{};

/// Real symmetric matrix. Construction checks symmetry to kTol.symmetry
/// (relative to the largest entry); use symmetrized() for matrices that are
/// symmetric only up to rounding.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }

  Eigen::Index order() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  struct Unchecked {};
  SymMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // columns are orthonormal eigenvectors
};

/// Cyclic Jacobi eigensolver. Throws InputError on non-finite input.
EigenDecomposition sym_eig(const SymMatrix& m);

/// Smallest eigenvalue, via sym_eig.
double min_eigenvalue(const SymMatrix& m);
double max_eigenvalue(const SymMatrix& m);

/// Lower-triangular L with L·Lᵀ = M, or nullopt when M is not positive definite.
std::optional<Matrix> cholesky(const SymMatrix& m);

struct LinearSolution {
  Vector x;
  double condition_estimate = 0.0;
};

/// Solves A·x = b with partial-pivoting LU. Throws NumericalError when the
/// reciprocal condition estimate puts the condition number above
/// kTol.max_condition.
LinearSolution solve_linear(const Matrix& a, const Vector& b);

}  // namespace num
}  // namespace dirand
