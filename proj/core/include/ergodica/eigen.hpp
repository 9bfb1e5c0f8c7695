#pragma once

#include "ergodica/domain.hpp"

#include <optional>
#include <vector>

namespace ergodica {

/// Principal eigenpair of L phi = -lambda phi with zero Dirichlet data.
struct EigenPair {
  double lambda = 0.0;
  Vector phi;              // interior values, positive, max = 1
  double residual = 0.0;   // |L phi + lambda phi|_inf
  double cw_lower = 0.0;
  double cw_upper = 0.0;
  int iterations = 0;
  std::vector<double> bracket_widths;  // per power step

  double bracket_width() const { return cw_upper - cw_lower; }
};

struct EigenOptions {
  double tol = 1e-10;  // stop when cw_upper - cw_lower <= tol
  int max_iter = 2000;
  std::optional<Vector> start;  // positive interior vector, defaults to ones
};

/// Inverse power iteration on (sI - L_h)^{-1}, s the properness shift.
/// Throws SolverError if an iterate loses positivity and
/// IterationLimitError (carrying the bracket width) if max_iter is hit.
EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts = {});

/// min_i / max_i of (-L_h phi)_i / phi_i. Accepts interior or full vectors.
std::pair<double, double> collatz_wielandt(const DiscreteOperator& op, const Vector& phi);

struct BellmanEigenResult {
  EigenPair pair;
  Policy policy;                       // control index per interior node
  std::vector<double> lambda_history;  // one entry per frozen solve
  int policy_iterations = 0;
};

struct BellmanEigenOptions {
  EigenOptions eigen;
  int max_policy_iter = 200;
  Policy initial;  // empty means control 0 everywhere
};

/// Howard iteration: freeze the control field, compute its principal pair,
/// re-select the nodewise argmax against phi. lambda is nonincreasing along
/// the iteration and the limit is the minimum over policies.
BellmanEigenResult principal_eigenpair_bellman(const BellmanOperator& op,
                                               const BellmanEigenOptions& opts = {});
BellmanEigenResult principal_eigenpair_bellman(const BellmanSpec& spec, double eps,
                                               const DomainGrid& grid,
                                               const BellmanEigenOptions& opts = {});

/// Normalized left Perron vector of sI - L_h (sums to 1). Diagnostic only.
Vector donsker_varadhan_measure(const DiscreteOperator& op, double tol = 1e-12, int max_iter = 2000);

}  // namespace ergodica
