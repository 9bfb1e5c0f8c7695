#pragma once

#include "ergodica/coeff.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace ergodica {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Uniform grid on the unit torus, n points per axis, node k at k/n.
struct PeriodicGrid {
  int dim = 1;
  int n = 0;

  PeriodicGrid() = default;
  PeriodicGrid(int dim, int n);

  double h() const { return 1.0 / n; }
  std::size_t size() const {
    return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  }
  std::size_t index(int i, int j = 0) const;
  Vec2 point(std::size_t idx) const;
};

/// Coefficients sampled at every torus node.
std::vector<CoefficientSample> sample_field(const CoefficientField& field, const PeriodicGrid& grid);

enum class Normalization { mean_zero, anchor_at_y0 };

/// Solution (chi, gamma) of a(y):D^2 chi + f = gamma on the torus.
struct ErgodicSolution {
  PeriodicGrid grid;
  Vector chi;
  double gamma = 0.0;
  Normalization normalization = Normalization::anchor_at_y0;
  Vec2 anchor = Vec2::Zero();
  /// Relative residual of the discrete equation.
  double residual = 0.0;
};

/// Discrete y -> a(y):D^2_yy with periodic wrap. Off-diagonals are >= 0 and
/// rows sum to zero. Throws AssemblyError naming the worst node when the
/// mixed-term dominance |a12| <= min(a11, a22) fails.
SparseMatrix assemble_torus_diffusion(const CoefficientField& field, const PeriodicGrid& grid);
SparseMatrix assemble_torus_diffusion(const std::vector<CoefficientSample>& samples,
                                      const PeriodicGrid& grid);

inline constexpr double kCellTolerance = 1e-11;

/// Factorizes the bordered system [A, -1; mean^T, 0] once and solves cell
/// problems for any number of right-hand sides.
class CellSolver {
public:
  CellSolver(const SparseMatrix& a_op, const PeriodicGrid& grid, double tol = kCellTolerance);
  ~CellSolver();
  CellSolver(CellSolver&&) noexcept;
  CellSolver& operator=(CellSolver&&) noexcept;

  /// Solves A chi + f = gamma.
  ErgodicSolution solve(const Vector& f, Normalization norm = Normalization::anchor_at_y0) const;

  const PeriodicGrid& grid() const { return grid_; }
  const SparseMatrix& op() const { return a_op_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SparseMatrix a_op_;
  PeriodicGrid grid_;
  double tol_;
};

ErgodicSolution solve_cell(const SparseMatrix& a_op, const PeriodicGrid& grid, const Vector& f,
                           Normalization norm = Normalization::anchor_at_y0,
                           double tol = kCellTolerance);

/// Same as solve_cell; `rhs` is an arbitrary precomputed coupling term.
ErgodicSolution solve_cell_with_rhs(const SparseMatrix& a_op, const PeriodicGrid& grid,
                                    const Vector& rhs,
                                    Normalization norm = Normalization::anchor_at_y0,
                                    double tol = kCellTolerance);

/// Fourth-order centred derivative along `axis` (0 or 1) with periodic wrap.
Vector torus_gradient(const PeriodicGrid& grid, const Vector& values, int axis);

/// Periodic cubic interpolation of torus node values at y (wrapped).
double torus_interpolate(const PeriodicGrid& grid, const Vector& values, const Vec2& y);

/// Control index per torus node.
using Policy = std::vector<int>;

struct NonlinearCellSolution {
  ErgodicSolution solution;  // (w, c)
  Policy policy;
  int iterations = 0;
  /// max_beta [a_beta : (M + D^2 w)] - c, sup over nodes.
  double residual = 0.0;
};

inline constexpr double kHowardTolerance = 1e-10;

/// Howard policy iteration for max_beta a_beta(y):(M + D^2 w) = c. Keeps the
/// per-control operators so repeated solves (different M) share assembly.
class NonlinearCellSolver {
public:
  NonlinearCellSolver(const BellmanSpec& spec, const PeriodicGrid& grid,
                      double tol = kHowardTolerance, int max_iter = 100);

  NonlinearCellSolution solve(const Mat2& M, Policy initial = {}) const;

  /// Frozen-policy coefficient samples and operator.
  std::vector<CoefficientSample> frozen_samples(const Policy& policy) const;
  SparseMatrix frozen_operator(const Policy& policy) const;

  /// Policy maximizing a_beta:(M + D^2 w) nodewise; ties keep `current`.
  Policy improve(const Mat2& M, const Vector& w, const Policy& current, double* residual_out,
                 double gamma) const;

  const PeriodicGrid& grid() const { return grid_; }
  const BellmanSpec& spec() const { return spec_; }

private:
  BellmanSpec spec_;
  PeriodicGrid grid_;
  double tol_;
  int max_iter_;
  std::vector<std::vector<CoefficientSample>> samples_;  // per control
  std::vector<SparseMatrix> ops_;                        // per control
};

NonlinearCellSolution solve_nonlinear_cell(const BellmanSpec& spec, const Mat2& M,
                                           const PeriodicGrid& grid,
                                           double tol = kHowardTolerance);

}  // namespace ergodica
