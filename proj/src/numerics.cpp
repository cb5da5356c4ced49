#include "dirand/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dirand::num {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InputError("SymMatrix: matrix is not square");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if (!m_.allFinite()) throw InputError("SymMatrix: non-finite entry");
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kTol.symmetry * scale)
    throw InputError("SymMatrix: matrix is not symmetric");
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("SymMatrix: matrix is not square");
  return SymMatrix(Matrix(0.5 * (m + m.transpose())), Unchecked{});
}

EigenDecomposition sym_eig(const SymMatrix& sym) {
  const Matrix& m = sym.mat();
  if (!m.allFinite()) throw InputError("sym_eig: non-finite input");
  const Eigen::Index n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::Identity(n, n);

  const double total = a.squaredNorm();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * total || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q); stable small-angle form.
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.order() == 0) return 0.0;
  return sym_eig(m).values(0);
}

double max_eigenvalue(const SymMatrix& m) {
  if (m.order() == 0) return 0.0;
  return sym_eig(m).values(m.order() - 1);
}

std::optional<Matrix> cholesky(const SymMatrix& m) {
  Eigen::LLT<Matrix> llt(m.mat());
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) return std::nullopt;
  return l;
}

LinearSolution solve_linear(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw InputError("solve_linear: dimension mismatch");
  if (!a.allFinite() || !b.allFinite()) throw InputError("solve_linear: non-finite input");
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kTol.max_condition))
    throw NumericalError("solve_linear: matrix singular or ill-conditioned (condition estimate " +
                         std::to_string(condition) + ")");
  LinearSolution out{lu.solve(b), condition};
  // One step of iterative refinement.
  const Vector r = b - a * out.x;
  out.x += lu.solve(r);
  return out;
}

}  // namespace dirand::num
