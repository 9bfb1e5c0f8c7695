#include "ergodica/corrector.hpp"
#include "ergodica/errors.hpp"
#include "mixed_solver.hpp"

#include <array>
#include <cmath>
#include <map>
#include <sstream>

namespace ergodica {

namespace {

// Frozen optimal policy at a Hessian value and everything derived from it.
struct PolicyData {
  Policy policy;
  CorrectorSet frozen;
  EffectiveLinear eff;  // a_bar = D F_bar at the Hessian, a_bar_klm drives Psi
};

PolicyData frozen_data(const NonlinearCellSolver& solver, Policy policy, double tol) {
  PolicyData pd;
  pd.frozen = build_corrector_set(solver.frozen_samples(policy), solver.grid(), tol);
  pd.eff = effective_linear(pd.frozen);
  pd.policy = std::move(policy);
  return pd;
}

Mat2 hessian_at(const DerivativeBundle& b, std::size_t node) {
  Mat2 M = Mat2::Zero();
  const int d = b.grid.dim;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) M(k, l) = b.dkl(k, l)[static_cast<Eigen::Index>(node)];
  if (d == 2) M(0, 1) = M(1, 0) = 0.5 * (M(0, 1) + M(1, 0));
  return M;
}

Vector cell_field(const PolicyData& pd, const Mat2& M, int d) {
  Vector w = Vector::Zero(static_cast<Eigen::Index>(pd.frozen.grid.size()));
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) w += M(k, l) * pd.frozen.chi_kl[k * d + l].chi;
  return w;
}

double frozen_constant(const PolicyData& pd, const Mat2& M, int d) {
  double g = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) g += pd.eff.a_bar(k, l) * M(k, l);
  return g;
}

}  // namespace

NonlinearExpansion nonlinear_expansion(const BellmanSpec& spec, const DomainFunction& u,
                                       double lambda_bar, double eps, const DomainGrid& grid,
                                       const PeriodicGrid& torus, const NonlinearExpansionOptions& opts) {
  check_spec(spec);
  if (spec.dim() != grid.dim || torus.dim != grid.dim)
    throw InputError("nonlinear_expansion: dimension mismatch");
  if (!(eps > 0.0)) throw InputError("nonlinear_expansion: eps must be positive");
  if (!(opts.hessian_quantum > 0.0)) throw InputError("nonlinear_expansion: hessian_quantum must be positive");
  if (u.size() != static_cast<Eigen::Index>(grid.node_count()))
    throw InputError("nonlinear_expansion: expects a full node vector");
  for (const auto& ctl : spec.controls) {
    for (const auto& s : sample_field(ctl.field, torus))
      if (s.b.cwiseAbs().maxCoeff() != 0.0 || s.c != 0.0)
        throw InputError("nonlinear_expansion: controls must have b = c = 0");
  }

  const int d = grid.dim;
  const NonlinearCellSolver solver(spec, torus, opts.cell_tol);
  const DerivativeBundle bu = derivative_bundle(grid, u, 3);

  NonlinearExpansion out;
  const auto N = static_cast<Eigen::Index>(grid.node_count());
  out.w2_trace = DomainFunction::Zero(N);
  std::vector<Mat2> a_bar(grid.node_count(), Mat2::Zero());
  Vector Psi = Vector::Zero(N);

  std::map<std::array<long long, 3>, PolicyData> cache;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const Mat2 M = hessian_at(bu, n);
    const std::array<long long, 3> key{std::llround(M(0, 0) / opts.hessian_quantum),
                                       std::llround(M(0, 1) / opts.hessian_quantum),
                                       std::llround(M(1, 1) / opts.hessian_quantum)};
    const PolicyData* pd = nullptr;
    PolicyData fresh;
    double cell_residual = 0.0;
    try {
      auto it = cache.find(key);
      if (it != cache.end()) {
        const Policy check = solver.improve(M, cell_field(it->second, M, d), it->second.policy,
                                            &cell_residual, frozen_constant(it->second, M, d));
        if (check == it->second.policy) {
          pd = &it->second;
          ++out.cache_hits;
        } else {
          const NonlinearCellSolution sol = solver.solve(M, it->second.policy);
          fresh = frozen_data(solver, sol.policy, opts.cell_tol);
          cell_residual = sol.residual;
          pd = &fresh;
          ++out.cache_misses;
        }
      } else {
        const NonlinearCellSolution sol = solver.solve(M);
        cell_residual = sol.residual;
        pd = &cache.emplace(key, frozen_data(solver, sol.policy, opts.cell_tol)).first->second;
        ++out.cache_misses;
      }
    } catch (const SolverError& e) {
      const Vec2 x = grid.point(n);
      std::ostringstream os;
      os << "nonlinear cell problem at x = (" << x[0] << ", " << x[1] << "): " << e.what();
      throw SolverError(os.str());
    }

    const double w2 = torus_interpolate(torus, cell_field(*pd, M, d), fast_variable(grid, n, eps));
    out.w2_trace[static_cast<Eigen::Index>(n)] = w2;
    a_bar[n] = pd->eff.a_bar;
    double psi = 0.0;
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        for (int m = 0; m < d; ++m)
          psi += pd->eff.klm(k, l, m) * bu.dklm(k, l, m)[static_cast<Eigen::Index>(n)];
    Psi[static_cast<Eigen::Index>(n)] = psi;

    if (!grid.on_boundary(n)) {
      out.w2F_residual = std::max(out.w2F_residual, cell_residual);
      out.effective_residual = std::max(
          out.effective_residual, std::abs(frozen_constant(*pd, M, d) + lambda_bar * u[static_cast<Eigen::Index>(n)]));
    }
  }

  // a_bar(x) : D^2 w1 = -Psi(x), w1 = 0 on the boundary.
  const DiscreteOperator lin = assemble_operator(
      grid,
      [&](std::size_t node) {
        CoefficientSample s;
        s.a = a_bar[node];
        return s;
      },
      0.0);
  const Vector rhs = restrict_to_interior(grid, Psi);
  if (rhs.size() > 0 && rhs.cwiseAbs().maxCoeff() > 0.0) {
    const SparseMatrix B = -lin.matrix;
    out.w1 = extend_by_zero(grid, detail::MixedSolver(B).solve(rhs));
  } else {
    out.w1 = DomainFunction::Zero(N);
  }

  out.w_eps = u + eps * out.w1 + eps * eps * out.w2_trace;
  const BellmanOperator F(spec, eps, grid);
  const Vector r = F.apply(out.w_eps) + lambda_bar * restrict_to_interior(grid, u);
  out.residual = r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace ergodica
