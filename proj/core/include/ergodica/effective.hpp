#pragma once

#include "ergodica/coeff.hpp"
#include "ergodica/torus.hpp"

#include <vector>

namespace ergodica {

/// Torus correctors of the linear two-scale expansion. Multi-indices are
/// flattened row-major: (k,l) -> k*d + l, (k,l,m) -> (k*d + l)*d + m.
struct CorrectorSet {
  PeriodicGrid grid;
  std::vector<CoefficientSample> samples;  // a, b, c at torus nodes

  std::vector<ErgodicSolution> chi_kl;   // d^2
  std::vector<ErgodicSolution> eta_k;    // d
  ErgodicSolution nu;
  std::vector<ErgodicSolution> chi_klm;  // d^3
  std::vector<ErgodicSolution> eta_kl;   // d^2
  std::vector<ErgodicSolution> nu_k;     // d
  ErgodicSolution xi;

  int dim() const { return grid.dim; }
};

/// Solves the first round of cell problems (forcing a_kl, b_k, c) and then
/// the second round driven by their gradients. All correctors are anchored
/// at the grid origin.
CorrectorSet build_corrector_set(const LinearOperatorSpec& spec, const PeriodicGrid& grid,
                                 double tol = kCellTolerance);
/// Same from coefficient samples at the torus nodes (e.g. a frozen policy).
CorrectorSet build_corrector_set(std::vector<CoefficientSample> samples, const PeriodicGrid& grid,
                                 double tol = kCellTolerance);

/// Constant-coefficient operator a_bar:D^2 + b_bar.D + c_bar together with the
/// third-order constants that drive the first-order corrector.
struct EffectiveLinear {
  int dim = 1;
  Mat2 a_bar = Mat2::Zero();
  Vec2 b_bar = Vec2::Zero();
  double c_bar = 0.0;
  std::vector<double> a_bar_klm;  // d^3
  std::vector<double> b_bar_kl;   // d^2
  std::vector<double> c_bar_k;    // d
  double d_bar = 0.0;
  /// |gamma_12 - gamma_21| before symmetrization (0 in 1D).
  double asymmetry_defect = 0.0;

  double klm(int k, int l, int m) const { return a_bar_klm[(k * dim + l) * dim + m]; }
  double kl(int k, int l) const { return b_bar_kl[k * dim + l]; }
};

EffectiveLinear effective_linear(const LinearOperatorSpec& spec, const CorrectorSet& correctors,
                                 const PeriodicGrid& grid);

EffectiveLinear effective_linear(const CorrectorSet& correctors);

/// Convenience: corrector set plus packaging.
EffectiveLinear effective_linear(const LinearOperatorSpec& spec, const PeriodicGrid& grid);

/// Effective constant operator with no oscillation left (third-order
/// constants zero); used for constant-coefficient sanity paths.
EffectiveLinear constant_effective(int dim, const Mat2& a, const Vec2& b, double c);

/// F_bar(M): ergodic constant of max_beta a_beta(y):(M + D^2 w) = c.
double effective_nonlinear(const BellmanSpec& spec, const Mat2& M, const PeriodicGrid& grid,
                           double tol = kHowardTolerance);
double effective_nonlinear(const NonlinearCellSolver& solver, const Mat2& M);

/// Default finite-difference step 1e-4 (1 + |M|_max).
double default_linearization_step(const Mat2& M);

/// Centred finite-difference derivative D_M F_bar(M), symmetrized. A step
/// <= 0 selects the default. Throws SolverError on nonfinite values.
Mat2 linearize_effective(const BellmanSpec& spec, const Mat2& M, const PeriodicGrid& grid,
                         double step = 0.0);
Mat2 linearize_effective(const NonlinearCellSolver& solver, const Mat2& M, double step = 0.0);

/// Effective operator of a Bellman spec as a Bellman spec with constant
/// controls: the supporting planes D F_bar(M_k) at sampled unit directions
/// M_k. In 1D the directions +1 and -1 reproduce F_bar exactly.
BellmanSpec effective_bellman(const BellmanSpec& spec, const PeriodicGrid& grid,
                              int directions_2d = 24);

}  // namespace ergodica
