#include "ergodica/eigen.hpp"

#include "ergodica/errors.hpp"
#include "mixed_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ergodica {

namespace {

using detail::LVector;

struct Bracket {
  long double lower;
  long double upper;
};

Bracket cw_bracket(const SparseMatrix& A, const LVector& phi) {
  const LVector Lphi = detail::matvec(A, phi);
  Bracket br{std::numeric_limits<long double>::infinity(),
             -std::numeric_limits<long double>::infinity()};
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const long double r = -Lphi[i] / phi[i];
    br.lower = std::min(br.lower, r);
    br.upper = std::max(br.upper, r);
  }
  return br;
}

}  // namespace

EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts) {
  const SparseMatrix& A = op.matrix;
  const Eigen::Index M = A.rows();
  if (M == 0) throw InputError("principal_eigenpair: operator has no interior nodes");
  if (!(opts.tol > 0.0)) throw InputError("principal_eigenpair: tol must be positive");

  const double s = op.properness_shift();
  const detail::MixedSolver solver(A, s, 3);

  LVector v = LVector::Ones(M);
  if (opts.start) {
    if (opts.start->size() != M) throw InputError("principal_eigenpair: start vector size mismatch");
    if ((opts.start->array() <= 0.0).any()) throw InputError("principal_eigenpair: start vector must be positive");
    v = opts.start->cast<long double>();
    v /= v.maxCoeff();
  }

  EigenPair out;
  long double width = std::numeric_limits<long double>::infinity();
  Bracket br{};
  for (int it = 1; it <= opts.max_iter; ++it) {
    LVector x = solver.solve(v);
    const long double top = x.maxCoeff();
    if (!(top > 0.0L)) throw SolverError("power iteration: iterate lost positivity");
    x /= top;
    for (Eigen::Index i = 0; i < M; ++i) {
      if (!(x[i] > 0.0L)) {
        std::ostringstream os;
        os << "power iteration: iterate lost positivity at interior node " << i
           << " (operator not monotone?)";
        throw SolverError(os.str());
      }
    }
    v = x;
    br = cw_bracket(A, v);
    width = br.upper - br.lower;
    out.bracket_widths.push_back(static_cast<double>(width));
    out.iterations = it;
    if (width <= opts.tol) break;
  }
  if (!(width <= opts.tol)) {
    std::ostringstream os;
    os << "power iteration: bracket width " << static_cast<double>(width) << " after "
       << opts.max_iter << " iterations (tol " << opts.tol << ")";
    throw IterationLimitError(os.str(), static_cast<double>(width));
  }

  const LVector Lv = detail::matvec(A, v);
  long double lam = -v.dot(Lv) / v.squaredNorm();
  lam = std::clamp(lam, br.lower, br.upper);
  out.lambda = static_cast<double>(lam);
  out.cw_lower = static_cast<double>(br.lower);
  out.cw_upper = static_cast<double>(br.upper);
  out.phi = v.cast<double>();
  out.residual = static_cast<double>((Lv + lam * v).cwiseAbs().maxCoeff());
  return out;
}

std::pair<double, double> collatz_wielandt(const DiscreteOperator& op, const Vector& phi) {
  Vector inner = phi;
  if (phi.size() == static_cast<Eigen::Index>(op.grid.node_count()) &&
      phi.size() != op.matrix.rows())
    inner = restrict_to_interior(op.grid, phi);
  if (inner.size() != op.matrix.rows()) throw InputError("collatz_wielandt: size mismatch");
  for (Eigen::Index i = 0; i < inner.size(); ++i)
    if (!(inner[i] > 0.0)) throw InputError("collatz_wielandt: phi must be positive on the interior");
  const Bracket br = cw_bracket(op.matrix, inner.cast<long double>());
  return {static_cast<double>(br.lower), static_cast<double>(br.upper)};
}

BellmanEigenResult principal_eigenpair_bellman(const BellmanOperator& op,
                                               const BellmanEigenOptions& opts) {
  const std::size_t M = op.grid().interior_count();
  Policy policy = opts.initial.empty() ? Policy(M, 0) : opts.initial;
  if (policy.size() != M) throw InputError("initial policy does not match interior node count");
  for (int p : policy)
    if (p < 0 || static_cast<std::size_t>(p) >= op.controls())
      throw InputError("initial policy has an out-of-range control index");

  BellmanEigenResult res;
  std::set<Policy> seen;
  EigenOptions eo = opts.eigen;
  for (int k = 0; k < opts.max_policy_iter; ++k) {
    if (!seen.insert(policy).second) {
      std::ostringstream os;
      os << "Bellman eigenproblem: policy revisited after " << k << " iterations (lambda "
         << res.lambda_history.back() << ")";
      throw PolicyCycleError(os.str());
    }
    res.pair = principal_eigenpair(op.frozen(policy), eo);
    res.lambda_history.push_back(res.pair.lambda);
    res.policy_iterations = k + 1;
    Policy next = op.improve(extend_by_zero(op.grid(), res.pair.phi), policy);
    if (next == policy) {
      res.policy = std::move(policy);
      return res;
    }
    policy = std::move(next);
    eo.start = res.pair.phi;
  }
  std::ostringstream os;
  os << "Bellman eigenproblem: no stationary policy after " << opts.max_policy_iter << " iterations";
  throw IterationLimitError(os.str(), res.pair.bracket_width());
}

BellmanEigenResult principal_eigenpair_bellman(const BellmanSpec& spec, double eps,
                                               const DomainGrid& grid,
                                               const BellmanEigenOptions& opts) {
  return principal_eigenpair_bellman(BellmanOperator(spec, eps, grid), opts);
}

Vector donsker_varadhan_measure(const DiscreteOperator& op, double tol, int max_iter) {
  const Eigen::Index M = op.matrix.rows();
  if (M == 0) throw InputError("donsker_varadhan_measure: empty operator");
  const SparseMatrix Bt = detail::shifted(op.matrix, op.properness_shift()).transpose();
  const detail::MixedSolver solver(Bt, 1);
  LVector v = LVector::Constant(M, 1.0L / static_cast<long double>(M));
  for (int it = 0; it < max_iter; ++it) {
    LVector x = solver.solve(v);
    x /= x.sum();
    const long double change = (x - v).cwiseAbs().maxCoeff();
    v = x;
    if (change <= tol * v.cwiseAbs().maxCoeff()) return v.cast<double>();
  }
  throw IterationLimitError("donsker_varadhan_measure: no convergence", 0.0);
}

}  // namespace ergodica
