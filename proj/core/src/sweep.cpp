#include "ergodica/sweep.hpp"

#include "ergodica/corrector.hpp"
#include "ergodica/eigen.hpp"
#include "ergodica/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ergodica {

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& errors) {
  if (eps.size() != errors.size()) throw InputError("fit_rate: eps and error lists differ in length");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (std::isfinite(errors[i]) && errors[i] > 0.0 && eps[i] > 0.0) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(errors[i]));
    }
  }
  if (x.size() < 3) throw InputError("fit_rate: fewer than 3 positive data points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit_rate: all eps values coincide");
  RateFit f;
  f.slope = sxy / sxx;
  f.constant = std::exp(my - f.slope * mx);
  const double ss_res = syy - f.slope * sxy;
  f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  f.points = x.size();
  return f;
}

const MeasurementFit* SweepReport::fit(const std::string& measurement) const {
  for (const auto& f : fits)
    if (f.measurement == measurement) return &f;
  return nullptr;
}

double measurement_value(const SweepRow& row, Measurement m) {
  switch (m) {
    case Measurement::lambda_rate: return row.abs_err_lambda;
    case Measurement::eigfun_rate: return row.eigfun_err;
    case Measurement::z_rate: return row.z_norm;
    case Measurement::pivot_rate: return row.pivot_err;
    case Measurement::v_norm: return row.v_norm;
    case Measurement::residual_slope: return row.residual;
  }
  return kNaN;
}

int worker_count(int requested, std::size_t jobs) {
  int w = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("ERGODICA_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) w = std::min<long>(w, cap);
  }
  w = std::min<long>(w, static_cast<long>(std::max<std::size_t>(jobs, 1)));
  return std::max(w, 1);
}

namespace {

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct SweepContext {
  const SweepConfig& cfg;
  PeriodicGrid torus;
  CorrectorSet correctors;  // linear
  EffectiveLinear eff;      // linear
  BellmanSpec eff_bellman;  // bellman
};

EigenOptions eigen_options(const SweepConfig& cfg) {
  EigenOptions o;
  o.tol = cfg.tol.eigen;
  o.max_iter = cfg.tol.max_iter;
  return o;
}

void linear_row(const SweepContext& ctx, SweepRow& row, const DomainGrid& grid) {
  const SweepConfig& cfg = ctx.cfg;
  const EigenOptions eo = eigen_options(cfg);
  const EigenPair ueff = principal_eigenpair(assemble_effective(ctx.eff, grid), eo);
  const DiscreteOperator op = assemble_oscillatory(cfg.problem.linear, row.eps, grid);
  const EigenPair ueps = principal_eigenpair(op, eo);

  row.lambda_bar = ueff.lambda;
  row.lambda_eps = ueps.lambda;
  row.abs_err_lambda = std::abs(ueps.lambda - ueff.lambda);
  row.cw_lower = ueps.cw_lower;
  row.cw_upper = ueps.cw_upper;
  row.iterations = ueps.iterations;
  row.eigfun_err_direct = sup_norm(ueps.phi - ueff.phi);

  if (cfg.wants(Measurement::eigfun_rate) || cfg.wants(Measurement::z_rate) ||
      cfg.wants(Measurement::pivot_rate)) {
    const Vector w = pivot_problem(op, ueff.phi, ueff.lambda);
    const Alignment al = align_eigenfunctions(w, ueps, grid);
    const Vector diff = (1.0 + al.t_eps) * ueps.phi - ueff.phi;
    row.t_eps = al.t_eps;
    row.eigfun_err = sup_norm(diff);
    row.eigfun_err_l2 = std::sqrt(l2_inner(diff, diff, grid));
    row.pivot_err = sup_norm(w - ueff.phi);
    row.z_norm = sup_norm(al.z);
  }
  if (cfg.wants(Measurement::v_norm) || cfg.wants(Measurement::residual_slope)) {
    const DomainFunction u = extend_by_zero(grid, ueff.phi);
    const ExpansionResult ex = linear_expansion(op, ctx.correctors, ctx.eff, u);
    row.v_norm = ex.sup_norm_v;
    row.residual = expansion_residual(op, u, ex.v_eps, ueff.lambda);
  }
}

void bellman_row(const SweepContext& ctx, SweepRow& row, const DomainGrid& grid) {
  const SweepConfig& cfg = ctx.cfg;
  BellmanEigenOptions bo;
  bo.eigen = eigen_options(cfg);
  const BellmanEigenResult ueff = principal_eigenpair_bellman(BellmanOperator(ctx.eff_bellman, 0.0, grid), bo);
  const BellmanEigenResult ueps = principal_eigenpair_bellman(cfg.problem.bellman, row.eps, grid, bo);

  row.lambda_bar = ueff.pair.lambda;
  row.lambda_eps = ueps.pair.lambda;
  row.abs_err_lambda = std::abs(ueps.pair.lambda - ueff.pair.lambda);
  row.cw_lower = ueps.pair.cw_lower;
  row.cw_upper = ueps.pair.cw_upper;
  row.iterations = ueps.pair.iterations;
  const Vector diff = ueps.pair.phi - ueff.pair.phi;
  row.eigfun_err_direct = sup_norm(diff);
  row.eigfun_err = row.eigfun_err_direct;
  row.eigfun_err_l2 = std::sqrt(l2_inner(diff, diff, grid));
  if (cfg.wants(Measurement::residual_slope)) {
    NonlinearExpansionOptions no;
    no.cell_tol = cfg.tol.howard;
    const NonlinearExpansion ne = nonlinear_expansion(cfg.problem.bellman, extend_by_zero(grid, ueff.pair.phi),
                                                      ueff.pair.lambda, row.eps, grid, ctx.torus, no);
    row.residual = ne.residual;
  }
}

}  // namespace

SweepReport run_sweep(const SweepConfig& cfg) {
  const Problem& prob = cfg.problem;
  SweepReport rep;
  rep.problem = prob.name;
  rep.mode = to_string(prob.mode);
  rep.dim = prob.dim;
  rep.oversampling = cfg.oversampling;
  rep.torus_n = cfg.torus_points();
  for (Measurement m : cfg.measurements) rep.measurements.emplace_back(to_string(m));

  SweepContext ctx{cfg, PeriodicGrid(prob.dim, cfg.torus_points()), {}, {}, {}};
  if (prob.mode == ProblemMode::linear) {
    ctx.correctors = build_corrector_set(prob.linear, ctx.torus, cfg.tol.cell);
    ctx.eff = effective_linear(ctx.correctors);
    rep.effective = ctx.eff;
  } else {
    ctx.eff_bellman = effective_bellman(prob.bellman, ctx.torus);
    for (const auto& c : ctx.eff_bellman.controls) {
      const Mat2 a = c.field(Vec2::Zero()).a;
      rep.effective_planes.push_back(a(0, 0));
      if (prob.dim == 2) {
        rep.effective_planes.push_back(a(0, 1));
        rep.effective_planes.push_back(a(1, 1));
      }
    }
    rep.effective.dim = prob.dim;
  }

  if (cfg.measurements.empty()) return rep;

  rep.rows.resize(cfg.eps_denominators.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    rep.rows[i].m = cfg.eps_denominators[i];
    rep.rows[i].eps = 1.0 / static_cast<double>(cfg.eps_denominators[i]);
    rep.rows[i].n = static_cast<int>(cfg.oversampling * cfg.eps_denominators[i]);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.rows.size(); i = next++) {
      SweepRow& row = rep.rows[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        const DomainGrid grid(prob.dim, row.n);
        if (prob.mode == ProblemMode::linear)
          linear_row(ctx, row, grid);
        else
          bellman_row(ctx, row, grid);
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
      }
      if (cfg.record_timings)
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int workers = worker_count(cfg.threads, rep.rows.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (Measurement m : cfg.measurements) {
    MeasurementFit mf;
    mf.measurement = to_string(m);
    std::vector<double> eps;
    std::vector<double> vals;
    for (const auto& row : rep.rows) {
      const double v = measurement_value(row, m);
      if (row.ok() && std::isfinite(v)) {
        eps.push_back(row.eps);
        vals.push_back(v);
      }
    }
    if (!vals.empty() && std::all_of(vals.begin(), vals.end(), [](double v) { return std::abs(v) <= 1e-9; })) {
      mf.status = "exact";
      mf.fit.points = vals.size();
    } else {
      try {
        mf.fit = fit_rate(eps, vals);
        mf.status = "ok";
      } catch (const InputError& e) {
        mf.status = std::string("insufficient: ") + e.what();
      }
    }
    rep.fits.push_back(std::move(mf));
  }
  return rep;
}

}  // namespace ergodica
