#include "ergodica/corrector.hpp"

#include "ergodica/errors.hpp"
#include "mixed_solver.hpp"

#include <algorithm>
#include <cmath>

namespace ergodica {

namespace {

void require_same_grid(const DomainGrid& a, const DomainGrid& b, const char* what) {
  if (a.dim != b.dim || a.n != b.n || a.lower != b.lower || a.upper != b.upper)
    throw InputError(std::string(what) + ": grids differ");
}

void require_full(const DomainGrid& grid, const DomainFunction& f, const char* what) {
  if (f.size() != static_cast<Eigen::Index>(grid.node_count()))
    throw InputError(std::string(what) + ": expects a full node vector");
}

DomainFunction trace_of(const CorrectorSet& cs, const ErgodicSolution& s, const DomainGrid& grid,
                        double eps) {
  return torus_trace(cs.grid, s.chi, grid, eps);
}

// Vectors of A chi and D_y chi for one corrector.
struct TorusData {
  Vector applied;
  std::vector<Vector> grad;
};

TorusData torus_data(const SparseMatrix& A, const PeriodicGrid& grid, const ErgodicSolution& s) {
  TorusData t;
  t.applied = A * s.chi;
  for (int i = 0; i < grid.dim; ++i) t.grad.push_back(torus_gradient(grid, s.chi, i));
  return t;
}

double at(const DomainFunction& f, std::size_t node) { return f[static_cast<Eigen::Index>(node)]; }

}  // namespace

DomainFunction second_corrector(const CorrectorSet& cs, const DerivativeBundle& bundle, double eps) {
  if (bundle.order < 2) throw InputError("second_corrector: bundle must carry second derivatives");
  if (cs.dim() != bundle.grid.dim) throw InputError("second_corrector: dimension mismatch");
  const int d = cs.dim();
  const DomainGrid& grid = bundle.grid;
  DomainFunction w = trace_of(cs, cs.nu, grid, eps).cwiseProduct(bundle.u);
  for (int k = 0; k < d; ++k) {
    w += trace_of(cs, cs.eta_k[k], grid, eps).cwiseProduct(bundle.dk(k));
    for (int l = 0; l < d; ++l) w += trace_of(cs, cs.chi_kl[k * d + l], grid, eps).cwiseProduct(bundle.dkl(k, l));
  }
  return w;
}

double second_corrector_identity_residual(const CorrectorSet& cs, const DerivativeBundle& bundle,
                                          double lambda_bar, int stride) {
  if (bundle.order < 2) throw InputError("identity residual: bundle must carry second derivatives");
  const int d = cs.dim();
  const SparseMatrix A = assemble_torus_diffusion(cs.samples, cs.grid);
  std::vector<Vector> Achi;
  for (const auto& s : cs.chi_kl) Achi.push_back(A * s.chi);
  std::vector<Vector> Aeta;
  for (const auto& s : cs.eta_k) Aeta.push_back(A * s.chi);
  const Vector Anu = A * cs.nu.chi;

  const DomainGrid& grid = bundle.grid;
  double worst = 0.0;
  for (std::size_t r = 0; r < grid.interior_count(); r += static_cast<std::size_t>(std::max(1, stride))) {
    const std::size_t node = grid.interior_node(r);
    const double u = at(bundle.u, node);
    for (std::size_t j = 0; j < cs.grid.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const CoefficientSample& s = cs.samples[j];
      double v = Anu[jj] * u + s.c * u + lambda_bar * u;
      for (int k = 0; k < d; ++k) {
        const double uk = at(bundle.dk(k), node);
        v += Aeta[k][jj] * uk + s.b[k] * uk;
        for (int l = 0; l < d; ++l) {
          const double ukl = at(bundle.dkl(k, l), node);
          v += Achi[k * d + l][jj] * ukl + s.a(k, l) * ukl;
        }
      }
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

DomainFunction solve_psi1(const EffectiveLinear& eff, const DerivativeBundle& bundle) {
  if (bundle.order < 3) throw InputError("solve_psi1: bundle must carry third derivatives");
  if (eff.dim != bundle.grid.dim) throw InputError("solve_psi1: dimension mismatch");
  const int d = eff.dim;
  const DomainGrid& grid = bundle.grid;
  const DiscreteOperator op = assemble_effective(eff, grid);

  Vector rhs(static_cast<Eigen::Index>(grid.interior_count()));
  for (std::size_t r = 0; r < grid.interior_count(); ++r) {
    const std::size_t node = grid.interior_node(r);
    double f = eff.d_bar * at(bundle.u, node);
    for (int k = 0; k < d; ++k) {
      f += eff.c_bar_k[k] * at(bundle.dk(k), node);
      for (int l = 0; l < d; ++l) {
        f += eff.kl(k, l) * at(bundle.dkl(k, l), node);
        for (int m = 0; m < d; ++m) f += eff.klm(k, l, m) * at(bundle.dklm(k, l, m), node);
      }
    }
    rhs[static_cast<Eigen::Index>(r)] = f;
  }
  if (rhs.cwiseAbs().maxCoeff() == 0.0) return DomainFunction::Zero(static_cast<Eigen::Index>(grid.node_count()));
  // L_bar psi = -rhs  <=>  (-L_bar) psi = rhs
  const SparseMatrix B = -op.matrix;
  const detail::MixedSolver solver(B);
  return extend_by_zero(grid, solver.solve(rhs));
}

DomainFunction third_corrector(const CorrectorSet& cs, const DerivativeBundle& bundle,
                               const DerivativeBundle& psi1_bundle, double eps) {
  if (cs.dim() != 1) throw InputError("third_corrector: available in one dimension only");
  if (bundle.order < 3 || psi1_bundle.order < 2)
    throw InputError("third_corrector: needs third derivatives of u and second of psi1");
  require_same_grid(bundle.grid, psi1_bundle.grid, "third_corrector");
  const DomainGrid& grid = bundle.grid;
  auto T = [&](const ErgodicSolution& s) { return trace_of(cs, s, grid, eps); };
  DomainFunction w = T(cs.chi_klm[0]).cwiseProduct(bundle.dklm(0, 0, 0));
  w += T(cs.eta_kl[0]).cwiseProduct(bundle.dkl(0, 0));
  w += T(cs.nu_k[0]).cwiseProduct(bundle.dk(0));
  w += T(cs.xi).cwiseProduct(bundle.u);
  w += T(cs.chi_kl[0]).cwiseProduct(psi1_bundle.dkl(0, 0));
  w += T(cs.eta_k[0]).cwiseProduct(psi1_bundle.dk(0));
  w += T(cs.nu).cwiseProduct(psi1_bundle.u);
  return w;
}

double third_corrector_identity_residual(const CorrectorSet& cs, const DerivativeBundle& bundle,
                                         const DerivativeBundle& psi1_bundle, int stride) {
  if (bundle.order < 3 || psi1_bundle.order < 2)
    throw InputError("identity residual: needs third derivatives of u and second of psi1");
  require_same_grid(bundle.grid, psi1_bundle.grid, "identity residual");
  const int d = cs.dim();
  const PeriodicGrid& tg = cs.grid;
  const SparseMatrix A = assemble_torus_diffusion(cs.samples, tg);

  std::vector<TorusData> chi, eta, chi3, eta2, nu1;
  for (const auto& s : cs.chi_kl) chi.push_back(torus_data(A, tg, s));
  for (const auto& s : cs.eta_k) eta.push_back(torus_data(A, tg, s));
  for (const auto& s : cs.chi_klm) chi3.push_back(torus_data(A, tg, s));
  for (const auto& s : cs.eta_kl) eta2.push_back(torus_data(A, tg, s));
  for (const auto& s : cs.nu_k) nu1.push_back(torus_data(A, tg, s));
  const TorusData nu = torus_data(A, tg, cs.nu);
  const TorusData xi = torus_data(A, tg, cs.xi);

  const DomainGrid& grid = bundle.grid;
  double worst = 0.0;
  for (std::size_t r = 0; r < grid.interior_count(); r += static_cast<std::size_t>(std::max(1, stride))) {
    const std::size_t x = grid.interior_node(r);
    const double u = at(bundle.u, x);
    const double p = at(psi1_bundle.u, x);
    for (std::size_t j = 0; j < tg.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const CoefficientSample& s = cs.samples[j];
      // oscillating operator on psi1 and the w3 cell terms
      double v = s.c * p + nu.applied[jj] * p + xi.applied[jj] * u;
      for (int k = 0; k < d; ++k) {
        v += (s.b[k] + eta[k].applied[jj]) * at(psi1_bundle.dk(k), x);
        v += nu1[k].applied[jj] * at(bundle.dk(k), x);
        for (int l = 0; l < d; ++l) {
          v += (s.a(k, l) + chi[k * d + l].applied[jj]) * at(psi1_bundle.dkl(k, l), x);
          v += eta2[k * d + l].applied[jj] * at(bundle.dkl(k, l), x);
          for (int m = 0; m < d; ++m)
            v += chi3[(k * d + l) * d + m].applied[jj] * at(bundle.dklm(k, l, m), x);
        }
      }
      // 2 a_im d_{y_i} d_{x_m} w2 + b_i d_{y_i} w2
      for (int i = 0; i < d; ++i) {
        double dy_w2 = nu.grad[i][jj] * u;
        for (int k = 0; k < d; ++k) {
          dy_w2 += eta[k].grad[i][jj] * at(bundle.dk(k), x);
          for (int l = 0; l < d; ++l) dy_w2 += chi[k * d + l].grad[i][jj] * at(bundle.dkl(k, l), x);
        }
        v += s.b[i] * dy_w2;
        for (int m = 0; m < d; ++m) {
          double dyx_w2 = nu.grad[i][jj] * at(bundle.dk(m), x);
          for (int k = 0; k < d; ++k) {
            dyx_w2 += eta[k].grad[i][jj] * at(bundle.dkl(m, k), x);
            for (int l = 0; l < d; ++l)
              dyx_w2 += chi[k * d + l].grad[i][jj] * at(bundle.dklm(k, l, m), x);
          }
          v += 2.0 * s.a(i, m) * dyx_w2;
        }
      }
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

DomainFunction boundary_corrector(const DiscreteOperator& op, const DomainFunction& trace) {
  const DomainGrid& grid = op.grid;
  require_full(grid, trace, "boundary_corrector");
  DomainFunction g = DomainFunction::Zero(trace.size());
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    if (grid.on_boundary(n)) g[static_cast<Eigen::Index>(n)] = -trace[static_cast<Eigen::Index>(n)];
  const Vector rhs = op.boundary * g;
  DomainFunction z = g;
  if (rhs.cwiseAbs().maxCoeff() == 0.0) return z;
  // A z_int + boundary g = 0  <=>  (-A) z_int = boundary g
  const SparseMatrix B = -op.matrix;
  const detail::MixedSolver solver(B);
  const Vector zi = solver.solve(rhs);
  for (std::size_t r = 0; r < grid.interior_count(); ++r)
    z[static_cast<Eigen::Index>(grid.interior_node(r))] = zi[static_cast<Eigen::Index>(r)];
  return z;
}

std::pair<DomainFunction, DomainFunction> boundary_correctors(const LinearOperatorSpec& spec,
                                                              double eps, const DomainGrid& grid,
                                                              const DomainFunction& w2_trace,
                                                              const DomainFunction& w3_trace) {
  const DiscreteOperator op = assemble_oscillatory(spec, eps, grid);
  DomainFunction z2 = boundary_corrector(op, w2_trace);
  DomainFunction z3 = w3_trace.size() == 0 ? DomainFunction() : boundary_corrector(op, w3_trace);
  return {std::move(z2), std::move(z3)};
}

ExpansionResult full_corrector(const DomainFunction& psi1, const DomainFunction& w2_trace,
                               const DomainFunction& z2, const DomainFunction& w3_trace,
                               const DomainFunction& z3, double eps) {
  const Eigen::Index n = psi1.size();
  if (w2_trace.size() != n || z2.size() != n || (w3_trace.size() != 0 && w3_trace.size() != n) ||
      (z3.size() != 0 && z3.size() != n))
    throw InputError("full_corrector: inputs live on different grids");
  ExpansionResult r;
  r.psi1 = psi1;
  r.w2_trace = w2_trace;
  r.z2 = z2;
  r.w3_trace = w3_trace;
  r.z3 = z3;
  r.v_eps = eps * psi1 + eps * eps * (w2_trace + z2);
  if (w3_trace.size() != 0) r.v_eps += eps * eps * eps * w3_trace;
  if (z3.size() != 0) r.v_eps += eps * eps * eps * z3;
  r.sup_norm_v = n == 0 ? 0.0 : r.v_eps.cwiseAbs().maxCoeff();
  return r;
}

ExpansionResult linear_expansion(const DiscreteOperator& op, const CorrectorSet& cs,
                                 const EffectiveLinear& eff, const DomainFunction& u) {
  const DomainGrid& grid = op.grid;
  require_full(grid, u, "linear_expansion");
  const double eps = op.eps;
  if (!(eps > 0.0)) throw InputError("linear_expansion: needs an oscillatory operator");
  const DerivativeBundle bu = derivative_bundle(grid, u, 3);
  const DomainFunction psi1 = solve_psi1(eff, bu);
  const DomainFunction w2 = second_corrector(cs, bu, eps);
  const DomainFunction z2 = boundary_corrector(op, w2);
  DomainFunction w3;
  DomainFunction z3;
  if (grid.dim == 1) {
    w3 = third_corrector(cs, bu, derivative_bundle(grid, psi1, 2), eps);
    z3 = boundary_corrector(op, w3);
  }
  return full_corrector(psi1, w2, z2, w3, z3, eps);
}

double expansion_residual(const DiscreteOperator& op, const DomainFunction& u,
                          const DomainFunction& v, double lambda_bar) {
  require_full(op.grid, u, "expansion_residual");
  require_full(op.grid, v, "expansion_residual");
  const Vector r = op.apply(u + v) + lambda_bar * restrict_to_interior(op.grid, u);
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

Vector pivot_problem(const DiscreteOperator& op, const Vector& u, double lambda_bar) {
  if (u.size() != op.matrix.rows()) throw InputError("pivot_problem: u must hold interior values");
  if (u.size() == 0 || u.cwiseAbs().maxCoeff() == 0.0) return Vector::Zero(u.size());
  const double s = op.properness_shift();
  const detail::MixedSolver solver(op.matrix, s, 3);
  return solver.solve(Vector((lambda_bar + s) * u));
}

Vector pivot_problem(const LinearOperatorSpec& spec, double eps, const DomainGrid& grid,
                     const EigenPair& u_eff, double lambda_bar) {
  return pivot_problem(assemble_oscillatory(spec, eps, grid), u_eff.phi, lambda_bar);
}

double l2_inner(const Vector& f, const Vector& g, const DomainGrid& grid) {
  if (f.size() != g.size()) throw InputError("l2_inner: size mismatch");
  return f.dot(g) * grid.cell_volume();
}

Alignment align_eigenfunctions(const Vector& w, const Vector& u_eps, const DomainGrid& grid) {
  if (w.size() != u_eps.size()) throw InputError("align_eigenfunctions: size mismatch");
  const double uu = l2_inner(u_eps, u_eps, grid);
  if (!(uu > 0.0)) throw InputError("align_eigenfunctions: eigenfunction is zero");
  Alignment a;
  a.t_eps = l2_inner(w, u_eps, grid) / uu - 1.0;
  a.z = u_eps - w + a.t_eps * u_eps;
  return a;
}

Alignment align_eigenfunctions(const Vector& w, const EigenPair& u_eps, const DomainGrid& grid) {
  return align_eigenfunctions(w, u_eps.phi, grid);
}

}  // namespace ergodica
