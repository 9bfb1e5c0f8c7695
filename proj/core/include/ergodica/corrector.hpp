#pragma once

#include "ergodica/domain.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/eigen.hpp"

#include <utility>
#include <vector>

namespace ergodica {

/// Derivatives of a node function on a DomainGrid up to third order, at every
/// node (boundary included). Multi-indices flattened as in CorrectorSet.
struct DerivativeBundle {
  DomainGrid grid;
  int order = 0;
  DomainFunction u;
  std::vector<DomainFunction> d1;  // d
  std::vector<DomainFunction> d2;  // d^2
  std::vector<DomainFunction> d3;  // d^3

  const DomainFunction& dk(int k) const { return d1[k]; }
  const DomainFunction& dkl(int k, int l) const { return d2[k * grid.dim + l]; }
  const DomainFunction& dklm(int k, int l, int m) const {
    return d3[(k * grid.dim + l) * grid.dim + m];
  }
};

/// Fourth-order finite differences: centred in the interior, shifted
/// one-sided windows near the edges; mixed derivatives are products of the
/// one-axis operators. Throws InputError when an axis has too few nodes.
DerivativeBundle derivative_bundle(const DomainGrid& grid, const DomainFunction& u, int order);

/// Finite-difference weights for the m-th derivative at z from nodes x.
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m);

/// Torus values at y = frac(x/eps) for every domain node.
DomainFunction torus_trace(const PeriodicGrid& torus, const Vector& values, const DomainGrid& grid,
                           double eps);

/// x -> w2(x, x/eps) = chi^{kl} d_kl u + eta^k d_k u + nu u.
DomainFunction second_corrector(const CorrectorSet& correctors, const DerivativeBundle& bundle,
                                double eps);

/// Max over interior x (every `stride`-th node) and all torus nodes y of
/// |a(y) D_yy w2 + a(y):D^2 u + b(y).Du + c(y) u + lambda_bar u|.
double second_corrector_identity_residual(const CorrectorSet& correctors,
                                          const DerivativeBundle& bundle, double lambda_bar,
                                          int stride = 1);

/// Dirichlet problem L_bar psi1 = -(a_klm d_klm u + b_kl d_kl u + c_k d_k u + d u).
DomainFunction solve_psi1(const EffectiveLinear& eff, const DerivativeBundle& bundle);

/// x -> w3(x, x/eps) including the psi1 block. One dimension only.
DomainFunction third_corrector(const CorrectorSet& correctors, const DerivativeBundle& bundle,
                               const DerivativeBundle& psi1_bundle, double eps);

/// Max over sampled (x, y) of
/// |a D_xx psi1 + b D_x psi1 + c psi1 + 2a D_yx w2 + b D_y w2 + a D_yy w3|.
double third_corrector_identity_residual(const CorrectorSet& correctors,
                                         const DerivativeBundle& bundle,
                                         const DerivativeBundle& psi1_bundle, int stride = 1);

/// Solves L^eps z = 0 in the interior with z = -trace on the boundary ring.
DomainFunction boundary_corrector(const DiscreteOperator& op, const DomainFunction& trace);

/// (z2, z3); an empty w3 trace gives an empty z3.
std::pair<DomainFunction, DomainFunction> boundary_correctors(const LinearOperatorSpec& spec,
                                                              double eps, const DomainGrid& grid,
                                                              const DomainFunction& w2_trace,
                                                              const DomainFunction& w3_trace);

struct ExpansionResult {
  DomainFunction psi1;
  DomainFunction w2_trace;
  DomainFunction w3_trace;  // empty in 2D
  DomainFunction z2;
  DomainFunction z3;        // empty in 2D
  DomainFunction v_eps;
  double sup_norm_v = 0.0;
};

/// v = eps psi1 + eps^2 (w2 + z2) + eps^3 (w3 + z3). Empty w3/z3 count as 0.
ExpansionResult full_corrector(const DomainFunction& psi1, const DomainFunction& w2_trace,
                               const DomainFunction& z2, const DomainFunction& w3_trace,
                               const DomainFunction& z3, double eps);

/// Whole linear pipeline for one eps: bundle of u, w2, psi1, w3 (1D), boundary
/// correctors and v.
ExpansionResult linear_expansion(const DiscreteOperator& op, const CorrectorSet& correctors,
                                 const EffectiveLinear& eff, const DomainFunction& u);

/// |L^eps_h (u + v) + lambda_bar u|_inf over interior nodes.
double expansion_residual(const DiscreteOperator& op, const DomainFunction& u,
                          const DomainFunction& v, double lambda_bar);

/// Pivot problem L^eps w = -lambda_bar u with zero boundary data, solved in the
/// properly shifted form (L^eps - s) w = -(lambda_bar + s) u. u and w are
/// interior vectors.
Vector pivot_problem(const DiscreteOperator& op, const Vector& u, double lambda_bar);
Vector pivot_problem(const LinearOperatorSpec& spec, double eps, const DomainGrid& grid,
                     const EigenPair& u_eff, double lambda_bar);

struct Alignment {
  double t_eps = 0.0;
  Vector z;  // interior values, orthogonal to u_eps
};

/// t = (w, u_eps)/|u_eps|^2 - 1 and z = u_eps - w + t u_eps with discrete L2
/// products over interior nodes.
Alignment align_eigenfunctions(const Vector& w, const Vector& u_eps, const DomainGrid& grid);
Alignment align_eigenfunctions(const Vector& w, const EigenPair& u_eps, const DomainGrid& grid);

/// Discrete L2 product over interior nodes times the cell volume.
double l2_inner(const Vector& f, const Vector& g, const DomainGrid& grid);

// --------------------------------------------------------------------------
// Nonlinear (convex Bellman) expansion u + eps w1 + eps^2 w2(x, x/eps).

struct NonlinearExpansionOptions {
  double hessian_quantum = 1e-4;  // cache key resolution for D^2 u(x)
  double cell_tol = kHowardTolerance;
};

struct NonlinearExpansion {
  DomainFunction w_eps;
  DomainFunction w1;
  DomainFunction w2_trace;
  /// |F_h(x/eps, D^2 w_eps) + lambda_bar u|_inf over interior nodes.
  double residual = 0.0;
  /// Max cell residual max_beta a_beta:(D^2u + D_yy w2) - F_bar(D^2u).
  double w2F_residual = 0.0;
  /// Max |F_bar(D^2 u(x)) + lambda_bar u(x)| over interior nodes.
  double effective_residual = 0.0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

/// `u` is the effective eigenfunction (full node vector) on `grid` and
/// `torus` resolves the cell problems. Controls must have b = c = 0.
NonlinearExpansion nonlinear_expansion(const BellmanSpec& spec, const DomainFunction& u,
                                       double lambda_bar, double eps, const DomainGrid& grid,
                                       const PeriodicGrid& torus,
                                       const NonlinearExpansionOptions& opts = {});

}  // namespace ergodica
