#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dirand/numerics.hpp"

using namespace dirand;
using num::Matrix;
using num::SymMatrix;
using num::Vector;

namespace {

Matrix random_spd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = d(gen);
  return g * g.transpose() + Matrix::Identity(n, n);
}

void expect_valid_decomposition(const Matrix& m) {
  const auto e = num::sym_eig(SymMatrix(m));
  const Matrix& v = e.vectors;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  EXPECT_LE((v * e.values.asDiagonal() * v.transpose() - m).cwiseAbs().maxCoeff(), 1e-10 * scale);
  EXPECT_LE((v.transpose() * v - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < e.values.size(); ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  EXPECT_NEAR(e.values.sum(), m.trace(), 1e-9);
  if (m.rows() <= 4) EXPECT_NEAR(e.values.prod(), m.determinant(), 1e-8 * std::max(1.0, std::abs(m.determinant())));
}

}  // namespace

TEST(SymEig, IdentityHasUnitSpectrum) {
  const auto e = num::sym_eig(SymMatrix::identity(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-14);
}

TEST(SymEig, DiagonalKeepsStandardBasis) {
  Matrix m(2, 2);
  m << -1, 0, 0, 2;
  const auto e = num::sym_eig(SymMatrix(m));
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 2.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(1, 1)), 1.0, 1e-14);
}

TEST(SymEig, PauliXSpectrum) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const auto e = num::sym_eig(SymMatrix(m));
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
  expect_valid_decomposition(m);
}

TEST(SymEig, RandomMatricesReconstruct) {
  for (int n : {2, 3, 4, 13, 40}) {
    Matrix m = random_spd(n, static_cast<unsigned>(n));
    m -= 3.0 * Matrix::Identity(n, n);
    expect_valid_decomposition(m);
  }
}

TEST(SymEig, RejectsNonFinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(num::sym_eig(SymMatrix::symmetrized(m)), InputError);
}

TEST(SymMatrix, RejectsAsymmetry) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(SymMatrix{m}, InputError);
}

TEST(SymEig, ExtremeEigenvalues) {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  EXPECT_NEAR(num::min_eigenvalue(SymMatrix(m)), 1.0, 1e-14);
  EXPECT_NEAR(num::max_eigenvalue(SymMatrix(m)), 3.0, 1e-14);
}

TEST(Cholesky, IdentityFactorIsIdentity) {
  const auto l = num::cholesky(SymMatrix::identity(3));
  ASSERT_TRUE(l.has_value());
  EXPECT_LE((*l - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Cholesky, HandFactorization) {
  Matrix m(2, 2);
  m << 4, 2, 2, 2;
  const auto l = num::cholesky(SymMatrix(m));
  ASSERT_TRUE(l.has_value());
  Matrix expected(2, 2);
  expected << 2, 0, 1, 1;
  EXPECT_LE((*l - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((*l * l->transpose() - m).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Cholesky, IndefiniteIsRejected) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_FALSE(num::cholesky(SymMatrix(m)).has_value());
}

TEST(SolveLinear, IdentityReturnsRightHandSide) {
  Vector b(3);
  b << 1, -2, 3;
  const auto s = num::solve_linear(Matrix::Identity(3, 3), b);
  EXPECT_LE((s.x - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveLinear, Diagonal) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 4;
  Vector b(2);
  b << 2, 4;
  const auto s = num::solve_linear(a, b);
  EXPECT_NEAR(s.x(0), 1.0, 1e-15);
  EXPECT_NEAR(s.x(1), 1.0, 1e-15);
}

TEST(SolveLinear, RecoversKnownSolution) {
  const Matrix a = random_spd(5, 7);
  Vector x(5);
  x << 1, -1, 0.5, 2, -3;
  const Vector b = a * x;
  const auto s = num::solve_linear(a, b);
  EXPECT_LE((s.x - x).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((a * s.x - b).norm(), 1e-9 * (a.norm() * s.x.norm() + b.norm()));
  EXPECT_GT(s.condition_estimate, 0.0);
}

TEST(SolveLinear, SingularIsRejected) {
  Matrix a(2, 2);
  a << 1, 2, 2, 4;
  Vector b(2);
  b << 1, 1;
  EXPECT_THROW(num::solve_linear(a, b), NumericalError);
}
