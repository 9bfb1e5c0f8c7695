#include "ergodica/config.hpp"
#include "ergodica/corrector.hpp"
#include "ergodica/eigen.hpp"
#include "ergodica/errors.hpp"
#include "ergodica/report.hpp"
#include "ergodica/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace ergodica;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct Options {
  std::string config;
  std::string out;
  std::string eps;
  std::string format = "json";
  bool effective = false;
  bool timings = false;
};

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

fs::path out_dir(const Options& o, const SweepConfig& cfg) { return o.out.empty() ? cfg.outputs.dir : fs::path(o.out); }

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw IoError("cannot write " + path.string());
}

// Node values as CSV: x1[,x2],value
std::string node_csv(const DomainGrid& grid, const DomainFunction& f) {
  std::string s = grid.dim == 1 ? "x1,value\n" : "x1,x2,value\n";
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const Vec2 x = grid.point(n);
    s += format_number(x[0]) + ",";
    if (grid.dim == 2) s += format_number(x[1]) + ",";
    s += format_number(f[static_cast<Eigen::Index>(n)]) + "\n";
  }
  return s;
}

std::string emit(const ojson& j, const std::string& format) {
  if (format == "json") return j.dump(2) + "\n";
  std::string head;
  std::string vals;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_structured()) continue;
    head += (head.empty() ? "" : ",") + it.key();
    const std::string v = it->is_number() ? format_number(it->get<double>()) : it->is_null() ? "nan" : it->dump();
    vals += (vals.empty() ? "" : ",") + v;
  }
  return head + "\n" + vals + "\n";
}

long eps_from_options(const Options& o, const SweepConfig& cfg) {
  if (!o.eps.empty()) return parse_eps_denominator(o.eps);
  if (!cfg.eps_denominators.empty()) return cfg.eps_denominators.front();
  throw ConfigError("no eps given (use --eps or eps_list)");
}

int run_effective(const Options& o, const SweepConfig& cfg) {
  const PeriodicGrid torus(cfg.problem.dim, cfg.torus_points());
  ojson j;
  j["problem"] = cfg.problem.name;
  j["torus_n"] = torus.n;
  if (cfg.problem.mode == ProblemMode::linear) {
    const EffectiveLinear e = effective_linear(cfg.problem.linear, torus);
    const int d = e.dim;
    ojson a = ojson::array();
    for (int k = 0; k < d; ++k) {
      ojson row = ojson::array();
      for (int l = 0; l < d; ++l) row.push_back(e.a_bar(k, l));
      a.push_back(row);
    }
    j["a_bar"] = a;
    j["b_bar"] = std::vector<double>(e.b_bar.data(), e.b_bar.data() + d);
    j["c_bar"] = e.c_bar;
    j["a_bar_klm"] = e.a_bar_klm;
    j["b_bar_kl"] = e.b_bar_kl;
    j["c_bar_k"] = e.c_bar_k;
    j["d_bar"] = e.d_bar;
    j["asymmetry_defect"] = e.asymmetry_defect;
    j["structure_violations"] = validate_structure(cfg.problem.linear, 256, cfg.seed).violations.size();
  } else {
    const NonlinearCellSolver solver(cfg.problem.bellman, torus, cfg.tol.howard);
    const BellmanSpec planes = effective_bellman(cfg.problem.bellman, torus);
    ojson p = ojson::array();
    for (const auto& c : planes.controls) {
      const Mat2 a = c.field(Vec2::Zero()).a;
      p.push_back(cfg.problem.dim == 1 ? ojson::array({a(0, 0)})
                                       : ojson::array({a(0, 0), a(0, 1), a(1, 1)}));
    }
    Mat2 I = Mat2::Zero();
    I(0, 0) = 1.0;
    if (cfg.problem.dim == 2) I(1, 1) = 1.0;
    j["F_bar_identity"] = effective_nonlinear(solver, I);
    j["F_bar_minus_identity"] = effective_nonlinear(solver, Mat2(-I));
    j["planes"] = p;
  }
  const std::string text = emit(j, o.format);
  std::cout << text;
  if (!o.out.empty()) write_text(fs::path(o.out) / ("effective." + o.format), text);
  return kOk;
}

int run_eigen(const Options& o, const SweepConfig& cfg) {
  const Problem& prob = cfg.problem;
  EigenOptions eo;
  eo.tol = cfg.tol.eigen;
  eo.max_iter = cfg.tol.max_iter;
  ojson j;
  j["problem"] = prob.name;
  DomainGrid grid;
  EigenPair pair;
  const PeriodicGrid torus(prob.dim, cfg.torus_points());
  if (o.effective) {
    grid = DomainGrid(prob.dim, cfg.effective_domain_n());
    j["eps"] = 0.0;
    if (prob.mode == ProblemMode::linear) {
      pair = principal_eigenpair(assemble_effective(effective_linear(prob.linear, torus), grid), eo);
    } else {
      BellmanEigenOptions bo;
      bo.eigen = eo;
      pair = principal_eigenpair_bellman(BellmanOperator(effective_bellman(prob.bellman, torus), 0.0, grid), bo).pair;
    }
  } else {
    const long m = eps_from_options(o, cfg);
    grid = DomainGrid(prob.dim, static_cast<int>(cfg.oversampling * m));
    const double eps = 1.0 / static_cast<double>(m);
    j["eps"] = eps;
    if (prob.mode == ProblemMode::linear) {
      pair = principal_eigenpair(assemble_oscillatory(prob.linear, eps, grid), eo);
    } else {
      BellmanEigenOptions bo;
      bo.eigen = eo;
      pair = principal_eigenpair_bellman(prob.bellman, eps, grid, bo).pair;
    }
  }
  j["n"] = grid.n[0];
  j["lambda"] = pair.lambda;
  j["cw_lower"] = pair.cw_lower;
  j["cw_upper"] = pair.cw_upper;
  j["residual"] = pair.residual;
  j["iterations"] = pair.iterations;
  const std::string text = emit(j, o.format);
  std::cout << text;
  if (!o.out.empty()) {
    write_text(fs::path(o.out) / ("eigen." + o.format), text);
    write_text(fs::path(o.out) / "phi.csv", node_csv(grid, extend_by_zero(grid, pair.phi)));
  }
  return kOk;
}

int run_corrector(const Options& o, const SweepConfig& cfg) {
  const Problem& prob = cfg.problem;
  const long m = eps_from_options(o, cfg);
  const double eps = 1.0 / static_cast<double>(m);
  const DomainGrid grid(prob.dim, static_cast<int>(cfg.oversampling * m));
  const PeriodicGrid torus(prob.dim, cfg.torus_points());
  EigenOptions eo;
  eo.tol = cfg.tol.eigen;
  eo.max_iter = cfg.tol.max_iter;
  ojson j;
  j["problem"] = prob.name;
  j["eps"] = eps;
  j["n"] = grid.n[0];
  if (prob.mode == ProblemMode::linear) {
    const CorrectorSet cs = build_corrector_set(prob.linear, torus, cfg.tol.cell);
    const EffectiveLinear eff = effective_linear(cs);
    const EigenPair ueff = principal_eigenpair(assemble_effective(eff, grid), eo);
    const DiscreteOperator op = assemble_oscillatory(prob.linear, eps, grid);
    const DomainFunction u = extend_by_zero(grid, ueff.phi);
    const ExpansionResult ex = linear_expansion(op, cs, eff, u);
    const double residual = expansion_residual(op, u, ex.v_eps, ueff.lambda);
    j["lambda_bar"] = ueff.lambda;
    j["sup_norm_v"] = ex.sup_norm_v;
    j["residual_slope_inputs"] = {{"eps", eps}, {"residual", number(residual)}, {"v_norm", ex.sup_norm_v}};
    if (!o.out.empty()) {
      write_text(fs::path(o.out) / "psi1.csv", node_csv(grid, ex.psi1));
      write_text(fs::path(o.out) / "w2_trace.csv", node_csv(grid, ex.w2_trace));
      write_text(fs::path(o.out) / "v_eps.csv", node_csv(grid, ex.v_eps));
    }
  } else {
    BellmanEigenOptions bo;
    bo.eigen = eo;
    const BellmanEigenResult ueff =
        principal_eigenpair_bellman(BellmanOperator(effective_bellman(prob.bellman, torus), 0.0, grid), bo);
    NonlinearExpansionOptions no;
    no.cell_tol = cfg.tol.howard;
    const DomainFunction u = extend_by_zero(grid, ueff.pair.phi);
    const NonlinearExpansion ne = nonlinear_expansion(prob.bellman, u, ueff.pair.lambda, eps, grid, torus, no);
    const double sup_v = (ne.w_eps - u).cwiseAbs().maxCoeff();
    j["lambda_bar"] = ueff.pair.lambda;
    j["sup_norm_v"] = sup_v;
    j["residual_slope_inputs"] = {{"eps", eps}, {"residual", ne.residual}, {"v_norm", sup_v}};
    j["w2F_residual"] = ne.w2F_residual;
    j["cache_hits"] = ne.cache_hits;
    j["cache_misses"] = ne.cache_misses;
    if (!o.out.empty()) {
      write_text(fs::path(o.out) / "w1.csv", node_csv(grid, ne.w1));
      write_text(fs::path(o.out) / "w2_trace.csv", node_csv(grid, ne.w2_trace));
      write_text(fs::path(o.out) / "w_eps.csv", node_csv(grid, ne.w_eps));
    }
  }
  std::cout << emit(j, o.format);
  return kOk;
}

int run_sweep_cmd(const Options& o, SweepConfig cfg) {
  if (o.timings) cfg.record_timings = true;
  if (!o.eps.empty()) cfg.eps_denominators = {parse_eps_denominator(o.eps)};
  const SweepReport rep = run_sweep(cfg);
  const fs::path dir = out_dir(o, cfg);
  if (o.format == "csv")
    emit_report(rep, ReportFormat::csv, dir / cfg.outputs.csv);
  else
    emit_report(rep, ReportFormat::json, dir / cfg.outputs.json);

  bool failed = false;
  for (const auto& r : rep.rows) {
    std::cout << "eps=1/" << r.m << "  lambda_eps=" << format_number(r.lambda_eps)
              << "  lambda_bar=" << format_number(r.lambda_bar) << "  err=" << format_number(r.abs_err_lambda);
    if (!r.ok()) {
      std::cout << "  [" << r.status << "]";
      failed = true;
    }
    std::cout << "\n";
  }
  for (const auto& f : rep.fits)
    std::cout << f.measurement << ": " << f.status << "  slope=" << format_number(f.fit.slope)
              << "  C=" << format_number(f.fit.constant) << "  r2=" << format_number(f.fit.r2) << "\n";
  return failed ? kSolverError : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergodica: periodic homogenization and principal eigenvalues"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* eff = app.add_subcommand("effective", "effective coefficients");
  add_common(eff);
  CLI::App* eig = app.add_subcommand("eigen", "principal eigenpair");
  add_common(eig);
  eig->add_option("--eps", o.eps, "oscillation parameter, 1/m");
  eig->add_flag("--effective", o.effective, "solve the effective problem");
  CLI::App* cor = app.add_subcommand("corrector", "corrector expansion at one eps");
  add_common(cor);
  cor->add_option("--eps", o.eps, "oscillation parameter, 1/m");
  CLI::App* sw = app.add_subcommand("sweep", "eps sweep with rate fits");
  add_common(sw);
  sw->add_option("--eps", o.eps, "run a single eps instead of eps_list");
  sw->add_flag("--timings", o.timings, "record wall-clock seconds per row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  if (sw->parsed() && app.get_subcommand("sweep")->count("--format") == 0) o.format = "csv";

  try {
    const SweepConfig cfg = load_config(o.config);
    if (eff->parsed()) return run_effective(o, cfg);
    if (eig->parsed()) return run_eigen(o, cfg);
    if (cor->parsed()) return run_corrector(o, cfg);
    return run_sweep_cmd(o, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  }
}
