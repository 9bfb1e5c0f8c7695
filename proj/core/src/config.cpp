#include "ergodica/config.hpp"

#include "ergodica/catalog.hpp"
#include "ergodica/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ergodica {

using nlohmann::json;

const char* to_string(Measurement m) {
  switch (m) {
    case Measurement::lambda_rate: return "lambda_rate";
    case Measurement::eigfun_rate: return "eigfun_rate";
    case Measurement::z_rate: return "z_rate";
    case Measurement::pivot_rate: return "pivot_rate";
    case Measurement::v_norm: return "v_norm";
    case Measurement::residual_slope: return "residual_slope";
  }
  return "?";
}

Measurement measurement_from_string(const std::string& name) {
  for (auto m : {Measurement::lambda_rate, Measurement::eigfun_rate, Measurement::z_rate,
                 Measurement::pivot_rate, Measurement::v_norm, Measurement::residual_slope})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown measurement '" + name + "'");
}

std::vector<Measurement> default_measurements(ProblemMode mode) {
  if (mode == ProblemMode::bellman)
    return {Measurement::lambda_rate, Measurement::eigfun_rate, Measurement::residual_slope};
  return {Measurement::lambda_rate, Measurement::eigfun_rate, Measurement::z_rate,
          Measurement::pivot_rate,  Measurement::v_norm,      Measurement::residual_slope};
}

std::vector<double> SweepConfig::eps_list() const {
  std::vector<double> out;
  for (long m : eps_denominators) out.push_back(1.0 / static_cast<double>(m));
  return out;
}

int SweepConfig::effective_domain_n() const {
  if (domain_n > 0) return domain_n;
  return problem.dim == 1 ? 1024 : 128;
}

bool SweepConfig::wants(Measurement m) const {
  return std::find(measurements.begin(), measurements.end(), m) != measurements.end();
}

long eps_denominator(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  const double inv = 1.0 / eps;
  const double m = std::round(inv);
  if (std::abs(inv - m) > 1e-9 * m || m < 2.0)
    throw ConfigError("eps must be the reciprocal of an integer (got " + std::to_string(eps) + ")");
  return static_cast<long>(m);
}

long parse_eps_denominator(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse eps '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("cannot parse eps '" + text + "'");
    return eps_denominator(v);
  }
  const std::string num = text.substr(0, slash);
  const std::string den = text.substr(slash + 1);
  long a = 0;
  long b = 0;
  try {
    std::size_t ua = 0;
    std::size_t ub = 0;
    a = std::stol(num, &ua);
    b = std::stol(den, &ub);
    if (ua != num.size() || ub != den.size()) throw ConfigError("");
  } catch (const std::exception&) {
    throw ConfigError("cannot parse eps '" + text + "'");
  }
  if (a != 1 || b < 2) throw ConfigError("eps '" + text + "' must have the form 1/m with m >= 2");
  return b;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return obj.at(key).get<double>();
}

int integer(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return obj.at(key).get<int>();
}

Mat2 matrix_value(const json& v, int dim) {
  Mat2 a = Mat2::Zero();
  if (v.is_number()) {
    a(0, 0) = v.get<double>();
    if (dim == 2) a(1, 1) = a(0, 0);
    return a;
  }
  if (!v.is_array()) throw ConfigError("'a' must be a number or an array");
  if (dim == 1) {
    if (v.size() != 1 || !v[0].is_number()) throw ConfigError("1D 'a' must be [a11]");
    a(0, 0) = v[0].get<double>();
    return a;
  }
  if (v.size() != 2 || !v[0].is_array() || !v[1].is_array() || v[0].size() != 2 || v[1].size() != 2)
    throw ConfigError("2D 'a' must be [[a11, a12], [a21, a22]]");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = v[i][j].get<double>();
  return a;
}

Vec2 vector_value(const json& v, int dim) {
  Vec2 b = Vec2::Zero();
  if (v.is_number()) {
    b[0] = v.get<double>();
    return b;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim) throw ConfigError("'b' must have dim entries");
  for (int i = 0; i < dim; ++i) b[i] = v[i].get<double>();
  return b;
}

std::vector<TrigTerm> trig_terms(const json& arr) {
  if (!arr.is_array()) throw ConfigError("trig entries must be arrays of terms");
  std::vector<TrigTerm> out;
  for (const auto& t : arr) {
    check_keys(t, {"coef", "k1", "k2", "fn"}, "trig term");
    TrigTerm term;
    term.coef = num(t, "coef", 0.0);
    term.k1 = integer(t, "k1", 0);
    term.k2 = integer(t, "k2", 0);
    const std::string fn = t.value("fn", std::string("cos"));
    if (fn != "cos" && fn != "sin") throw ConfigError("trig term 'fn' must be 'cos' or 'sin'");
    term.sine = fn == "sin";
    out.push_back(term);
  }
  return out;
}

CoefficientField field_from_json(const json& f, const std::filesystem::path& base) {
  if (!f.is_object() || !f.contains("kind")) throw ConfigError("field needs a 'kind'");
  const std::string kind = f.at("kind").get<std::string>();
  if (kind == "constant") {
    check_keys(f, {"kind", "dim", "a", "b", "c"}, "constant field");
    const int dim = integer(f, "dim", 1);
    if (dim != 1 && dim != 2) throw ConfigError("field dim must be 1 or 2");
    const Mat2 a = f.contains("a") ? matrix_value(f.at("a"), dim) : Mat2(Mat2::Identity());
    Mat2 a_used = a;
    if (dim == 1) a_used(1, 1) = 0.0;
    const Vec2 b = f.contains("b") ? vector_value(f.at("b"), dim) : Vec2(Vec2::Zero());
    return make_constant_field(dim, a_used, b, num(f, "c", 0.0));
  }
  if (kind == "one_plus_delta_sin") {
    check_keys(f, {"kind", "delta"}, "one_plus_delta_sin field");
    return make_one_plus_delta_sin(num(f, "delta", 0.5));
  }
  if (kind == "sin_abc") {
    check_keys(f, {"kind", "delta", "b0", "b1", "c1", "c2"}, "sin_abc field");
    SinAbcParams p;
    p.delta = num(f, "delta", p.delta);
    p.b0 = num(f, "b0", p.b0);
    p.b1 = num(f, "b1", p.b1);
    p.c1 = num(f, "c1", p.c1);
    p.c2 = num(f, "c2", p.c2);
    return make_sin_abc(p);
  }
  if (kind == "separable_sin") {
    check_keys(f, {"kind", "delta"}, "separable_sin field");
    return make_separable_sin(num(f, "delta", 0.5));
  }
  if (kind == "trig") {
    check_keys(f, {"kind", "dim", "a11", "a12", "a22", "b1", "b2", "c"}, "trig field");
    TrigFieldSpec spec;
    spec.dim = integer(f, "dim", 1);
    const char* names[6] = {"a11", "a12", "a22", "b1", "b2", "c"};
    for (int i = 0; i < 6; ++i)
      if (f.contains(names[i])) spec.entries[i] = trig_terms(f.at(names[i]));
    return make_trig_field(spec);
  }
  if (kind == "tabulated") {
    check_keys(f, {"kind", "path"}, "tabulated field");
    std::filesystem::path p = f.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    try {
      return make_tabulated_field(load_tabulated_field(p));
    } catch (const Error& e) {
      throw ConfigError(std::string("tabulated field: ") + e.what());
    }
  }
  throw ConfigError("unknown field kind '" + kind + "'");
}

LinearOperatorSpec control_from_json(const json& c, const std::filesystem::path& base) {
  // Either a bare field or {"field": ..., optional constants}.
  const bool wrapped = c.contains("field");
  const json overrides = wrapped ? c : json::object();
  LinearOperatorSpec spec;
  spec.field = field_from_json(wrapped ? c.at("field") : c, base);
  const auto [lo, hi] = sampled_ellipticity(spec.field);
  spec.lambda_ell = num(overrides, "lambda_ell", lo);
  spec.Lambda_ell = num(overrides, "Lambda_ell", hi);
  spec.c1 = num(overrides, "c1", sampled_lower_order_bound(spec.field));
  spec.c2 = num(overrides, "c2", 0.0);
  return spec;
}

Problem catalog_with_params(const std::string& name, const json& params) {
  if (params.is_null() || params.empty()) return catalog_problem(name);
  if (name == "sin-a") {
    check_keys(params, {"delta"}, "sin-a params");
    const double d = num(params, "delta", 0.5);
    return make_linear_problem(name, make_one_plus_delta_sin(d), 1.0 - std::abs(d), 1.0 + std::abs(d));
  }
  if (name == "sin-abc") {
    check_keys(params, {"delta", "b0", "b1", "c1", "c2"}, "sin-abc params");
    SinAbcParams p;
    p.delta = num(params, "delta", p.delta);
    p.b0 = num(params, "b0", p.b0);
    p.b1 = num(params, "b1", p.b1);
    p.c1 = num(params, "c1", p.c1);
    p.c2 = num(params, "c2", p.c2);
    CoefficientField f = make_sin_abc(p);
    const double c1 = sampled_lower_order_bound(f);
    return make_linear_problem(name, std::move(f), 1.0 - std::abs(p.delta), 1.0 + std::abs(p.delta), c1);
  }
  if (name == "sep-2d") {
    check_keys(params, {"delta"}, "sep-2d params");
    const double d = num(params, "delta", 0.5);
    return make_linear_problem(name, make_separable_sin(d), 1.0 - std::abs(d), 1.0 + std::abs(d));
  }
  if (name == "constant") {
    check_keys(params, {"dim", "a", "b", "c"}, "constant params");
    json f = params;
    f["kind"] = "constant";
    CoefficientField field = field_from_json(f, {});
    const auto [lo, hi] = sampled_ellipticity(field, 4);
    return make_linear_problem(name, std::move(field), lo, hi, sampled_lower_order_bound(field, 4));
  }
  if (name == "pucci-1d") {
    check_keys(params, {"lambda", "Lambda"}, "pucci-1d params");
    const PucciSpec ps{num(params, "lambda", 1.0), num(params, "Lambda", 2.0), PucciSign::plus};
    if (!(ps.lambda_ell > 0.0 && ps.lambda_ell <= ps.Lambda_ell))
      throw ConfigError("pucci-1d needs 0 < lambda <= Lambda");
    return make_bellman_problem(name, pucci_as_bellman_1d(ps).controls);
  }
  if (name == "bellman-2ctl-1d") {
    check_keys(params, {"delta", "a2"}, "bellman-2ctl-1d params");
    const double d = num(params, "delta", 0.5);
    Mat2 a2 = Mat2::Zero();
    a2(0, 0) = num(params, "a2", 1.2);
    const double lo = std::min(1.0 - std::abs(d), a2(0, 0));
    const double hi = std::max(1.0 + std::abs(d), a2(0, 0));
    LinearOperatorSpec c1{make_one_plus_delta_sin(d), lo, hi, 0.0, 0.0};
    LinearOperatorSpec c2{make_constant_field(1, a2), lo, hi, 0.0, 0.0};
    return make_bellman_problem(name, {c1, c2});
  }
  return catalog_problem(name);  // reports the unknown name
}

Problem problem_from_json(const json& p, const std::filesystem::path& base) {
  if (p.is_string()) return catalog_problem(p.get<std::string>());
  if (!p.is_object() || !p.contains("name")) throw ConfigError("'problem' must be a name or an object with 'name'");
  const std::string name = p.at("name").get<std::string>();
  if (p.contains("field") || p.contains("controls")) {
    check_keys(p, {"name", "field", "controls", "lambda_ell", "Lambda_ell", "c1", "c2"}, "problem");
    if (p.contains("field") == p.contains("controls"))
      throw ConfigError("custom problem needs exactly one of 'field' or 'controls'");
    if (p.contains("field")) {
      json c = p;
      c.erase("name");
      LinearOperatorSpec spec = control_from_json(c, base);
      return make_linear_problem(name, spec.field, spec.lambda_ell, spec.Lambda_ell, spec.c1);
    }
    if (!p.at("controls").is_array() || p.at("controls").empty())
      throw ConfigError("'controls' must be a nonempty array");
    std::vector<LinearOperatorSpec> ctl;
    for (const auto& c : p.at("controls")) ctl.push_back(control_from_json(c, base));
    // A Bellman spec needs one ellipticity interval for all controls.
    double lo = ctl.front().lambda_ell;
    double hi = ctl.front().Lambda_ell;
    for (const auto& c : ctl) {
      lo = std::min(lo, c.lambda_ell);
      hi = std::max(hi, c.Lambda_ell);
    }
    for (auto& c : ctl) {
      c.lambda_ell = lo;
      c.Lambda_ell = hi;
    }
    return make_bellman_problem(name, std::move(ctl));
  }
  check_keys(p, {"name", "params"}, "problem");
  return catalog_with_params(name, p.contains("params") ? p.at("params") : json());
}

}  // namespace

SweepConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    check_keys(j,
               {"problem", "mode", "eps_list", "oversampling", "torus_n", "domain_n", "tolerances",
                "measurements", "outputs", "seed", "record_timings", "threads"},
               "config");
    SweepConfig cfg;
    if (!j.contains("problem")) throw ConfigError("config needs 'problem'");
    try {
      cfg.problem = problem_from_json(j.at("problem"), base);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
    if (j.contains("mode")) {
      const std::string mode = j.at("mode").get<std::string>();
      if (mode != "linear" && mode != "bellman") throw ConfigError("'mode' must be 'linear' or 'bellman'");
      if (mode != to_string(cfg.problem.mode))
        throw ConfigError("'mode' is " + mode + " but problem '" + cfg.problem.name + "' is " +
                          to_string(cfg.problem.mode));
    }

    if (j.contains("eps_list")) {
      if (!j.at("eps_list").is_array()) throw ConfigError("'eps_list' must be an array");
      for (const auto& e : j.at("eps_list")) {
        if (e.is_string())
          cfg.eps_denominators.push_back(parse_eps_denominator(e.get<std::string>()));
        else if (e.is_number())
          cfg.eps_denominators.push_back(eps_denominator(e.get<double>()));
        else
          throw ConfigError("eps_list entries must be numbers or '1/m' strings");
      }
      for (std::size_t i = 1; i < cfg.eps_denominators.size(); ++i)
        if (cfg.eps_denominators[i] <= cfg.eps_denominators[i - 1])
          throw ConfigError("eps_list must be strictly decreasing");
    }

    cfg.oversampling = integer(j, "oversampling", 64);
    if (cfg.oversampling < 16) throw ConfigError("oversampling must be >= 16");
    cfg.torus_n = integer(j, "torus_n", 0);
    if (cfg.torus_n != 0 && cfg.torus_n < 8) throw ConfigError("torus_n must be >= 8");
    cfg.domain_n = integer(j, "domain_n", 0);
    if (cfg.domain_n != 0 && cfg.domain_n < 8) throw ConfigError("domain_n must be >= 8");

    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      check_keys(t, {"eigen", "cell", "howard", "max_iter"}, "tolerances");
      cfg.tol.eigen = num(t, "eigen", cfg.tol.eigen);
      cfg.tol.cell = num(t, "cell", cfg.tol.cell);
      cfg.tol.howard = num(t, "howard", cfg.tol.howard);
      cfg.tol.max_iter = integer(t, "max_iter", cfg.tol.max_iter);
      if (!(cfg.tol.eigen > 0.0 && cfg.tol.cell > 0.0 && cfg.tol.howard > 0.0 && cfg.tol.max_iter > 0))
        throw ConfigError("tolerances must be positive");
    }

    if (j.contains("measurements")) {
      if (!j.at("measurements").is_array()) throw ConfigError("'measurements' must be an array");
      std::set<std::string> seen;
      for (const auto& m : j.at("measurements")) {
        const std::string name = m.get<std::string>();
        if (!seen.insert(name).second) continue;
        const Measurement meas = measurement_from_string(name);
        if (cfg.problem.mode == ProblemMode::bellman &&
            (meas == Measurement::z_rate || meas == Measurement::pivot_rate || meas == Measurement::v_norm))
          throw ConfigError(std::string("measurement ") + name + " is only defined for linear problems");
        cfg.measurements.push_back(meas);
      }
    } else {
      cfg.measurements = default_measurements(cfg.problem.mode);
    }

    if (j.contains("outputs")) {
      const json& o = j.at("outputs");
      check_keys(o, {"dir", "csv", "json"}, "outputs");
      if (o.contains("dir")) {
        std::filesystem::path d = o.at("dir").get<std::string>();
        cfg.outputs.dir = d.is_relative() && !base.empty() ? base / d : d;
      }
      cfg.outputs.csv = o.value("csv", cfg.outputs.csv);
      cfg.outputs.json = o.value("json", cfg.outputs.json);
    }
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a nonnegative integer");
      cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("record_timings")) cfg.record_timings = j.at("record_timings").get<bool>();
    cfg.threads = integer(j, "threads", 0);
    if (cfg.threads < 0) throw ConfigError("'threads' must be >= 0");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  }
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace ergodica
