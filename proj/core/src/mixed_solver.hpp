#pragma once

#include "ergodica/errors.hpp"
#include "ergodica/torus.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

namespace ergodica::detail {

using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// y = A x with long double accumulation over a row-major double matrix.
inline LVector matvec(const SparseMatrix& A, const LVector& x) {
  LVector y(A.rows());
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    long double acc = 0.0L;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      acc += static_cast<long double>(it.value()) * x[it.col()];
    y[r] = acc;
  }
  return y;
}

/// s I - A.
inline SparseMatrix shifted(const SparseMatrix& A, double s) {
  SparseMatrix I(A.rows(), A.cols());
  I.setIdentity();
  SparseMatrix B = s * I - A;
  B.makeCompressed();
  return B;
}

/// Sparse LU in double with iterative refinement against long double
/// residuals. Solves to roughly long double accuracy times the condition
/// number of the smooth error components.
class MixedSolver {
public:
  explicit MixedSolver(const SparseMatrix& B, int refinement = 3) : B_(B), refinement_(refinement) {
    factor(B);
  }

  /// Solves (s I - A) x = b. The factorization uses the rounded shifted
  /// matrix; refinement residuals use s and A exactly.
  MixedSolver(const SparseMatrix& A, double s, int refinement) : B_(A), shift_(s), shifted_(true), refinement_(refinement) {
    factor(shifted(A, s));
  }

  LVector apply(const LVector& x) const {
    if (!shifted_) return matvec(B_, x);
    return static_cast<long double>(shift_) * x - matvec(B_, x);
  }

  LVector solve(const LVector& rhs) const {
    Vector x0 = lu_.solve(rhs.cast<double>());
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
    LVector x = x0.cast<long double>();
    for (int k = 0; k < refinement_; ++k) {
      const LVector r = rhs - apply(x);
      const Vector dx = lu_.solve(r.cast<double>());
      x += dx.cast<long double>();
    }
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!std::isfinite(static_cast<double>(x[i]))) throw SolverError("nonfinite value in linear solve");
    return x;
  }

  Vector solve(const Vector& rhs) const { return solve(LVector(rhs.cast<long double>())).cast<double>(); }

private:
  void factor(const SparseMatrix& B) {
    Eigen::SparseMatrix<double> col = B;
    col.makeCompressed();
    lu_.analyzePattern(col);
    lu_.factorize(col);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
  }

  SparseMatrix B_;
  double shift_ = 0.0;
  bool shifted_ = false;
  int refinement_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace ergodica::detail
