#include "ergodica/effective.hpp"

#include "ergodica/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ergodica {

namespace {

std::string index_label(std::initializer_list<int> idx) {
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (int i : idx) {
    os << (first ? "" : ",") << i + 1;
    first = false;
  }
  os << ")";
  return os.str();
}

template <class F>
ErgodicSolution annotated_solve(const CellSolver& solver, const Vector& f, const std::string& what,
                                F&& label) {
  try {
    return solver.solve(f, Normalization::anchor_at_y0);
  } catch (const IterationLimitError& e) {
    throw IterationLimitError(what + " " + label() + ": " + e.what(), e.last_residual());
  } catch (const SolverError& e) {
    throw SolverError(what + " " + label() + ": " + e.what());
  }
}

}  // namespace

CorrectorSet build_corrector_set(const LinearOperatorSpec& spec, const PeriodicGrid& grid, double tol) {
  check_spec(spec);
  if (spec.dim() != grid.dim) throw InputError("spec and torus grid dimensions differ");
  return build_corrector_set(sample_field(spec.field, grid), grid, tol);
}

CorrectorSet build_corrector_set(std::vector<CoefficientSample> samples, const PeriodicGrid& grid,
                                 double tol) {
  if (samples.size() != grid.size()) throw InputError("coefficient samples do not match the torus grid");
  const int d = grid.dim;
  const auto N = static_cast<Eigen::Index>(grid.size());

  CorrectorSet cs;
  cs.grid = grid;
  cs.samples = std::move(samples);
  const CellSolver solver(assemble_torus_diffusion(cs.samples, grid), grid, tol);

  auto node_field = [&](auto pick) {
    Vector v(N);
    for (Eigen::Index k = 0; k < N; ++k) v[k] = pick(cs.samples[static_cast<std::size_t>(k)]);
    return v;
  };

  // First round: forcing by the coefficients themselves.
  cs.chi_kl.resize(d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      cs.chi_kl[k * d + l] = annotated_solve(
          solver, node_field([&](const CoefficientSample& s) { return s.a(k, l); }), "chi^{kl}",
          [&] { return index_label({k, l}); });
  cs.eta_k.resize(d);
  for (int k = 0; k < d; ++k)
    cs.eta_k[k] = annotated_solve(solver, node_field([&](const CoefficientSample& s) { return s.b[k]; }),
                                  "eta^k", [&] { return index_label({k}); });
  cs.nu = annotated_solve(solver, node_field([](const CoefficientSample& s) { return s.c; }), "nu",
                          [] { return std::string(); });

  // Gradients of the first round.
  auto grads = [&](const ErgodicSolution& sol) {
    std::vector<Vector> g;
    for (int i = 0; i < d; ++i) g.push_back(torus_gradient(grid, sol.chi, i));
    return g;
  };
  std::vector<std::vector<Vector>> dchi(d * d);
  for (int kl = 0; kl < d * d; ++kl) dchi[kl] = grads(cs.chi_kl[kl]);
  std::vector<std::vector<Vector>> deta(d);
  for (int k = 0; k < d; ++k) deta[k] = grads(cs.eta_k[k]);
  const std::vector<Vector> dnu = grads(cs.nu);

  // 2 a_{*m} . D chi : sum_i a_{im} d_i chi
  auto column_dot = [&](int m, const std::vector<Vector>& g) {
    Vector v = Vector::Zero(N);
    for (Eigen::Index n = 0; n < N; ++n)
      for (int i = 0; i < d; ++i) v[n] += cs.samples[static_cast<std::size_t>(n)].a(i, m) * g[i][n];
    return v;
  };
  auto drift_dot = [&](const std::vector<Vector>& g) {
    Vector v = Vector::Zero(N);
    for (Eigen::Index n = 0; n < N; ++n)
      for (int i = 0; i < d; ++i) v[n] += cs.samples[static_cast<std::size_t>(n)].b[i] * g[i][n];
    return v;
  };

  cs.chi_klm.resize(d * d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        cs.chi_klm[(k * d + l) * d + m] =
            annotated_solve(solver, 2.0 * column_dot(m, dchi[k * d + l]), "chi^{klm}",
                            [&] { return index_label({k, l, m}); });

  cs.eta_kl.resize(d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      cs.eta_kl[k * d + l] =
          annotated_solve(solver, 2.0 * column_dot(k, deta[l]) + drift_dot(dchi[k * d + l]),
                          "eta^{kl}", [&] { return index_label({k, l}); });

  cs.nu_k.resize(d);
  for (int k = 0; k < d; ++k)
    cs.nu_k[k] = annotated_solve(solver, 2.0 * column_dot(k, dnu) + drift_dot(deta[k]), "nu^k",
                                 [&] { return index_label({k}); });

  cs.xi = annotated_solve(solver, drift_dot(dnu), "xi", [] { return std::string(); });
  return cs;
}

EffectiveLinear effective_linear(const LinearOperatorSpec& spec, const CorrectorSet& cs,
                                 const PeriodicGrid& grid) {
  if (cs.grid.dim != grid.dim || cs.grid.n != grid.n || spec.dim() != grid.dim)
    throw InputError("effective_linear: corrector set built on a different grid");
  return effective_linear(cs);
}

EffectiveLinear effective_linear(const CorrectorSet& cs) {
  const int d = cs.grid.dim;
  EffectiveLinear eff;
  eff.dim = d;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) eff.a_bar(k, l) = cs.chi_kl[k * d + l].gamma;
  if (d == 2) {
    eff.asymmetry_defect = std::abs(eff.a_bar(0, 1) - eff.a_bar(1, 0));
    const double sym = 0.5 * (eff.a_bar(0, 1) + eff.a_bar(1, 0));
    eff.a_bar(0, 1) = eff.a_bar(1, 0) = sym;
  }
  for (int k = 0; k < d; ++k) eff.b_bar[k] = cs.eta_k[k].gamma;
  eff.c_bar = cs.nu.gamma;
  for (const auto& s : cs.chi_klm) eff.a_bar_klm.push_back(s.gamma);
  for (const auto& s : cs.eta_kl) eff.b_bar_kl.push_back(s.gamma);
  for (const auto& s : cs.nu_k) eff.c_bar_k.push_back(s.gamma);
  eff.d_bar = cs.xi.gamma;
  return eff;
}

EffectiveLinear effective_linear(const LinearOperatorSpec& spec, const PeriodicGrid& grid) {
  return effective_linear(spec, build_corrector_set(spec, grid), grid);
}

EffectiveLinear constant_effective(int dim, const Mat2& a, const Vec2& b, double c) {
  EffectiveLinear eff;
  eff.dim = dim;
  eff.a_bar = a;
  eff.b_bar = b;
  eff.c_bar = c;
  eff.a_bar_klm.assign(dim * dim * dim, 0.0);
  eff.b_bar_kl.assign(dim * dim, 0.0);
  eff.c_bar_k.assign(dim, 0.0);
  return eff;
}

double effective_nonlinear(const NonlinearCellSolver& solver, const Mat2& M) {
  return solver.solve(M).solution.gamma;
}

double effective_nonlinear(const BellmanSpec& spec, const Mat2& M, const PeriodicGrid& grid,
                           double tol) {
  return effective_nonlinear(NonlinearCellSolver(spec, grid, tol), M);
}

double default_linearization_step(const Mat2& M) { return 1e-4 * (1.0 + M.cwiseAbs().maxCoeff()); }

Mat2 linearize_effective(const NonlinearCellSolver& solver, const Mat2& M, double step) {
  const int d = solver.grid().dim;
  if (!(step > 0.0)) step = default_linearization_step(M);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Mat2 E = Mat2::Zero();
      if (i == j) {
        E(i, i) = 1.0;
      } else {
        E(i, j) = E(j, i) = 0.5;
      }
      const double fp = effective_nonlinear(solver, M + step * E);
      const double fm = effective_nonlinear(solver, M - step * E);
      const double deriv = (fp - fm) / (2.0 * step);
      if (!std::isfinite(deriv)) throw SolverError("linearize_effective: nonfinite derivative");
      out(i, j) = out(j, i) = deriv;
    }
  }
  return out;
}

Mat2 linearize_effective(const BellmanSpec& spec, const Mat2& M, const PeriodicGrid& grid,
                         double step) {
  return linearize_effective(NonlinearCellSolver(spec, grid), M, step);
}

BellmanSpec effective_bellman(const BellmanSpec& spec, const PeriodicGrid& grid, int directions_2d) {
  check_spec(spec);
  for (const auto& ctl : spec.controls) {
    for (const auto& s : sample_field(ctl.field, grid)) {
      if (s.b.cwiseAbs().maxCoeff() != 0.0 || s.c != 0.0)
        throw InputError("effective_bellman: controls must be pure second order (b = c = 0)");
    }
  }
  const NonlinearCellSolver solver(spec, grid);
  const int d = grid.dim;

  std::vector<Mat2> directions;
  if (d == 1) {
    Mat2 up = Mat2::Zero();
    up(0, 0) = 1.0;
    directions = {up, Mat2(-up)};
  } else {
    // Fibonacci points on the unit sphere of (m11, m22, sqrt(2) m12).
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < directions_2d; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / directions_2d;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      Mat2 m;
      m(0, 0) = r * std::cos(phi);
      m(1, 1) = r * std::sin(phi);
      m(0, 1) = m(1, 0) = z / std::sqrt(2.0);
      directions.push_back(m);
    }
  }

  BellmanSpec out;
  const auto& proto = spec.controls.front();
  std::vector<Mat2> planes;
  for (const Mat2& M : directions) {
    const Mat2 a = linearize_effective(solver, M);
    bool duplicate = false;
    for (const Mat2& p : planes) duplicate |= (p - a).cwiseAbs().maxCoeff() <= 1e-7;
    if (duplicate) continue;
    planes.push_back(a);
    LinearOperatorSpec ctl;
    ctl.field.dim = d;
    ctl.field.constant = true;
    ctl.field.name = "effective_plane";
    ctl.field.eval = [a](const Vec2&) {
      CoefficientSample s;
      s.a = a;
      return s;
    };
    ctl.lambda_ell = proto.lambda_ell;
    ctl.Lambda_ell = proto.Lambda_ell;
    out.controls.push_back(std::move(ctl));
  }
  return out;
}

}  // namespace ergodica
