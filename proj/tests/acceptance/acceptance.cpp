#include "ergodica/catalog.hpp"
#include "ergodica/config.hpp"
#include "ergodica/corrector.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/eigen.hpp"
#include "ergodica/problem.hpp"
#include "ergodica/sweep.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ergodica;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Certificate {
  std::string label;
  double lambda;
  double lower;
  double upper;
};

std::vector<Certificate> certificates;

void certify(const std::string& label, double lambda, double lower, double upper) {
  certificates.push_back({label, lambda, lower, upper});
}

void certify(const std::string& label, const EigenPair& p) {
  certify(label, p.lambda, p.cw_lower, p.cw_upper);
}

std::map<std::string, SweepReport> sweeps;

const SweepReport& sweep(const std::string& key, const std::string& json) {
  auto it = sweeps.find(key);
  if (it != sweeps.end()) return it->second;
  const SweepReport r = run_sweep(parse_config(json));
  for (const auto& row : r.rows)
    if (row.ok()) certify(key + " eps=1/" + std::to_string(row.m), row.lambda_eps, row.cw_lower, row.cw_upper);
  return sweeps.emplace(key, r).first->second;
}

const SweepReport& sin_abc() {
  return sweep("sin-abc", R"({"problem": "sin-abc", "eps_list": ["1/8", "1/16", "1/32", "1/64"],
    "oversampling": 64,
    "measurements": ["lambda_rate", "eigfun_rate", "z_rate", "pivot_rate", "v_norm", "residual_slope"]})");
}

const SweepReport& bellman() {
  return sweep("bellman-2ctl-1d", R"({"problem": "bellman-2ctl-1d",
    "eps_list": ["1/8", "1/16", "1/32", "1/64"], "oversampling": 64})");
}

const SweepReport& sep2d() {
  return sweep("sep-2d", R"({"problem": "sep-2d", "eps_list": ["1/4", "1/8", "1/16"],
    "oversampling": 16, "measurements": ["lambda_rate", "eigfun_rate"]})");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

bool rows_ok(const SweepReport& r, std::string& detail) {
  for (const auto& row : r.rows)
    if (!row.ok()) {
      detail = "row eps=1/" + std::to_string(row.m) + " " + row.status;
      return false;
    }
  return true;
}

Outcome slope_at_least(const SweepReport& r, const std::string& m, double min_slope,
                       double min_r2 = 0.0) {
  std::string bad;
  if (!rows_ok(r, bad)) return {false, bad};
  const MeasurementFit* f = r.fit(m);
  if (!f) return {false, m + " not fitted"};
  if (f->status != "ok") return {false, m + " " + f->status};
  const bool ok = f->fit.slope >= min_slope && f->fit.r2 >= min_r2;
  return {ok, m + " slope " + num(f->fit.slope) + " r2 " + num(f->fit.r2)};
}

Outcome combine(const Outcome& a, const Outcome& b) {
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome criterion1() {
  const Problem p = catalog_problem("sin-a");
  const double a_bar = effective_linear(p.linear, PeriodicGrid(1, 512)).a_bar(0, 0);
  const double quad = oracle::harmonic_mean([](double y) { return 1.0 + 0.5 * std::sin(2 * pi * y); });
  const double err = std::max(std::abs(a_bar - std::sqrt(3.0) / 2.0), std::abs(a_bar - quad));
  return {err <= 1e-6, "a_bar " + num(a_bar) + " err " + num(err)};
}

Outcome criterion2() {
  const Problem p = catalog_problem("sin-a");
  const EffectiveLinear eff = effective_linear(p.linear, PeriodicGrid(1, 512));
  const EigenPair big = principal_eigenpair(assemble_effective(eff, DomainGrid(1, 2048)));
  certify("effective n=2048", big);
  const double target = std::sqrt(3.0) / 2.0 * pi * pi;
  const double err = std::abs(big.lambda - target);
  const int n = 64;
  const EigenPair small = principal_eigenpair(assemble_effective(eff, DomainGrid(1, n)));
  certify("effective n=64", small);
  const double a = eff.a_bar(0, 0);
  const oracle::DensePair dense = oracle::principal_dense(oracle::dirichlet_matrix_1d(
      [a](double) { return a; }, [](double) { return 0.0; }, [](double) { return 0.0; }, n));
  const double derr = std::abs(dense.lambda - small.lambda);
  return {err <= 1e-3 && derr <= 1e-9,
          "lambda_bar " + num(big.lambda) + " err " + num(err) + "; dense n=64 diff " + num(derr)};
}

Outcome criterion3() { return slope_at_least(sin_abc(), "lambda_rate", 0.9, 0.95); }

Outcome criterion4() {
  return combine(slope_at_least(sin_abc(), "eigfun_rate", 0.9), slope_at_least(sin_abc(), "z_rate", 0.9));
}

Outcome criterion5() { return slope_at_least(sin_abc(), "pivot_rate", 0.9); }

Outcome criterion6() {
  const SweepReport& r = sin_abc();
  std::string bad;
  if (!rows_ok(r, bad)) return {false, bad};
  const double first = r.rows.front().v_norm / r.rows.front().eps;
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.v_norm / row.eps);
  return {std::isfinite(worst) && worst <= 10.0 * first,
          "sup |v|/eps " + num(worst) + " vs 10x " + num(10.0 * first)};
}

Outcome criterion7() {
  const Outcome rate = slope_at_least(bellman(), "lambda_rate", 0.9);

  const Problem lin = catalog_problem("sin-a");
  const BellmanSpec single{{lin.linear}};
  double single_diff = 0.0;
  for (long m : {8L, 16L, 32L, 64L}) {
    const DomainGrid g(1, static_cast<int>(64 * m));
    const EigenPair a = principal_eigenpair(assemble_oscillatory(lin.linear, 1.0 / m, g));
    const BellmanEigenResult b = principal_eigenpair_bellman(single, 1.0 / m, g);
    certify("sin-a linear eps=1/" + std::to_string(m), a);
    certify("sin-a singleton eps=1/" + std::to_string(m), b.pair);
    single_diff = std::max(single_diff, std::abs(a.lambda - b.pair.lambda));
  }

  const Problem bel = catalog_problem("bellman-2ctl-1d");
  double enum_diff = 0.0;
  for (double eps : {0.5, 0.25, 0.125}) {
    const std::vector<oracle::Fn1> controls{
        [eps](double x) { return 1.0 + 0.5 * std::sin(2 * pi * x / eps); }, [](double) { return 1.2; }};
    const BellmanEigenResult r = principal_eigenpair_bellman(bel.bellman, eps, DomainGrid(1, 8));
    certify("bellman n=8", r.pair);
    enum_diff = std::max(enum_diff, std::abs(r.pair.lambda - oracle::enumerate_bellman_eigenvalue_1d(controls, 8)));
  }
  return {rate.pass && single_diff <= 1e-10 && enum_diff <= 1e-9,
          rate.detail + "; singleton diff " + num(single_diff) + "; enumeration diff " + num(enum_diff)};
}

Outcome criterion8() {
  sin_abc();
  bellman();
  sep2d();
  const Problem p = catalog_problem("sin-abc");
  const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / 16, DomainGrid(1, 1024));
  const EigenPair base = principal_eigenpair(op);
  certify("restart base", base);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double spread = 0.0;
  for (int k = 0; k < 10; ++k) {
    EigenOptions opts;
    Vector start(op.matrix.rows());
    for (Eigen::Index i = 0; i < start.size(); ++i) start[i] = u(rng);
    opts.start = start;
    const EigenPair r = principal_eigenpair(op, opts);
    certify("restart " + std::to_string(k), r);
    spread = std::max(spread, std::abs(r.lambda - base.lambda));
  }
  double widest = 0.0;
  std::string failed;
  for (const auto& c : certificates) {
    widest = std::max(widest, c.upper - c.lower);
    const bool ok = c.lower <= c.lambda && c.lambda <= c.upper && c.upper - c.lower <= 1e-8;
    if (!ok && failed.empty()) failed = c.label;
  }
  std::string detail = std::to_string(certificates.size()) + " eigenpairs, widest bracket " + num(widest) +
                       "; restart spread " + num(spread);
  if (!failed.empty()) detail += "; first failure " + failed;
  return {failed.empty() && spread <= 1e-10, detail};
}

Outcome criterion9() {
  double corr = 0.0;
  double lam = 0.0;
  double abar = 0.0;
  for (int dim : {1, 2}) {
    Mat2 a = Mat2::Zero();
    Vec2 b = Vec2::Zero();
    if (dim == 1) {
      a(0, 0) = 2.0;
      b[0] = 0.5;
    } else {
      a << 1.5, 0.25, 0.25, 1.0;
      b << 0.5, -0.3;
    }
    const Problem p = make_linear_problem("constant", make_constant_field(dim, a, b, 1.0), 0.5, 2.0, 1.0);
    const PeriodicGrid torus(dim, 16);
    const CorrectorSet cs = build_corrector_set(p.linear, torus);
    const EffectiveLinear eff = effective_linear(cs);
    abar = std::max({abar, (eff.a_bar - a).cwiseAbs().maxCoeff(), (eff.b_bar - b).cwiseAbs().maxCoeff(),
                     std::abs(eff.c_bar - 1.0)});
    auto sup = [](const ErgodicSolution& s) { return s.chi.cwiseAbs().maxCoeff(); };
    for (const auto& s : cs.chi_kl) corr = std::max(corr, sup(s));
    for (const auto& s : cs.eta_k) corr = std::max(corr, sup(s));
    for (const auto& s : cs.chi_klm) corr = std::max(corr, sup(s));
    for (const auto& s : cs.eta_kl) corr = std::max(corr, sup(s));
    for (const auto& s : cs.nu_k) corr = std::max(corr, sup(s));
    corr = std::max({corr, sup(cs.nu), sup(cs.xi)});

    SweepConfig cfg;
    cfg.problem = p;
    cfg.eps_denominators = {4, 8, 16};
    cfg.oversampling = dim == 1 ? 32 : 8;
    cfg.measurements = dim == 1 ? std::vector<Measurement>{Measurement::lambda_rate, Measurement::eigfun_rate,
                                                           Measurement::z_rate, Measurement::v_norm}
                                : std::vector<Measurement>{Measurement::lambda_rate, Measurement::eigfun_rate};
    const SweepReport r = run_sweep(cfg);
    for (const auto& row : r.rows) {
      if (!row.ok()) return {false, row.status};
      certify("constant dim " + std::to_string(dim), row.lambda_eps, row.cw_lower, row.cw_upper);
      lam = std::max(lam, std::abs(row.lambda_eps - row.lambda_bar));
      if (dim == 1) corr = std::max({corr, row.z_norm, row.v_norm});
    }
  }
  return {abar <= 1e-12 && corr <= 1e-12 && lam <= 1e-9,
          "coefficient err " + num(abar) + "; corrector sup " + num(corr) + "; |lambda_eps - lambda_bar| " + num(lam)};
}

Outcome criterion10() {
  const SweepReport& r = sep2d();
  std::string bad;
  if (!rows_ok(r, bad)) return {false, bad};
  bool monotone = true;
  std::string errs;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    if (k > 0 && r.rows[k].abs_err_lambda >= r.rows[k - 1].abs_err_lambda) monotone = false;
    errs += (k ? ", " : "") + num(r.rows[k].abs_err_lambda);
  }
  const bool closer = r.rows.back().abs_err_lambda < r.rows.front().abs_err_lambda;
  return {monotone && closer, "errors " + errs};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "effective coefficient oracle", 1.0, criterion1},
      {2, "effective eigenvalue", 5.0, criterion2},
      {3, "eigenvalue rate", 120.0, criterion3},
      {4, "eigenfunction rate", 180.0, criterion4},
      {5, "pivot-problem rate", 180.0, criterion5},
      {6, "corrector bound", 180.0, criterion6},
      {7, "nonlinear pipeline", 600.0, criterion7},
      {8, "certification invariants", 600.0, criterion8},
      {9, "degenerate identities", 60.0, criterion9},
      {10, "2D sanity", 600.0, criterion10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
