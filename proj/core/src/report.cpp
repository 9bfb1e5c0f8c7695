#include "ergodica/report.hpp"

#include "ergodica/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ergodica {

using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kCsvHeader = "eps,lambda_eps,lambda_bar,abs_err_lambda,eigfun_err,z_norm,v_norm,seconds";

double parse_number(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InputError("bad number '" + s + "'");
  return v;
}

ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }
double num(const ojson& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::vector<double> nums(const ojson& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(num(v));
  return out;
}

ojson num_array(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }
bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

}  // namespace

std::string report_csv(const SweepReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : report.rows) {
    for (double v : {r.eps, r.lambda_eps, r.lambda_bar, r.abs_err_lambda, r.eigfun_err, r.z_norm, r.v_norm}) {
      out += format_number(v);
      out += ',';
    }
    out += format_number(r.seconds);
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InputError("CSV header mismatch");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(parse_number(cell));
    if (cells.size() != 8) throw InputError("CSV row needs 8 columns");
    SweepRow r;
    r.eps = cells[0];
    r.m = std::isfinite(r.eps) && r.eps > 0 ? std::lround(1.0 / r.eps) : 0;
    r.lambda_eps = cells[1];
    r.lambda_bar = cells[2];
    r.abs_err_lambda = cells[3];
    r.eigfun_err = cells[4];
    r.z_norm = cells[5];
    r.v_norm = cells[6];
    r.seconds = cells[7];
    rows.push_back(r);
  }
  return rows;
}

std::string report_json(const SweepReport& rep) {
  ojson j;
  j["problem"] = rep.problem;
  j["mode"] = rep.mode;
  j["dim"] = rep.dim;
  j["oversampling"] = rep.oversampling;
  j["torus_n"] = rep.torus_n;
  j["measurements"] = rep.measurements;

  const EffectiveLinear& e = rep.effective;
  ojson eff;
  eff["dim"] = e.dim;
  ojson a = ojson::array();
  for (int k = 0; k < e.dim; ++k) {
    ojson rowj = ojson::array();
    for (int l = 0; l < e.dim; ++l) rowj.push_back(num(e.a_bar(k, l)));
    a.push_back(rowj);
  }
  eff["a_bar"] = a;
  eff["b_bar"] = num_array(std::vector<double>(e.b_bar.data(), e.b_bar.data() + e.dim));
  eff["c_bar"] = num(e.c_bar);
  eff["a_bar_klm"] = num_array(e.a_bar_klm);
  eff["b_bar_kl"] = num_array(e.b_bar_kl);
  eff["c_bar_k"] = num_array(e.c_bar_k);
  eff["d_bar"] = num(e.d_bar);
  eff["asymmetry_defect"] = num(e.asymmetry_defect);
  j["effective"] = eff;
  j["effective_planes"] = num_array(rep.effective_planes);

  ojson rows = ojson::array();
  for (const auto& r : rep.rows) {
    ojson o;
    o["m"] = r.m;
    o["eps"] = num(r.eps);
    o["n"] = r.n;
    o["lambda_eps"] = num(r.lambda_eps);
    o["lambda_bar"] = num(r.lambda_bar);
    o["abs_err_lambda"] = num(r.abs_err_lambda);
    o["eigfun_err"] = num(r.eigfun_err);
    o["z_norm"] = num(r.z_norm);
    o["v_norm"] = num(r.v_norm);
    o["seconds"] = num(r.seconds);
    o["pivot_err"] = num(r.pivot_err);
    o["residual"] = num(r.residual);
    o["t_eps"] = num(r.t_eps);
    o["eigfun_err_direct"] = num(r.eigfun_err_direct);
    o["eigfun_err_l2"] = num(r.eigfun_err_l2);
    o["cw_lower"] = num(r.cw_lower);
    o["cw_upper"] = num(r.cw_upper);
    o["iterations"] = r.iterations;
    o["status"] = r.status;
    rows.push_back(o);
  }
  j["rows"] = rows;

  ojson fits = ojson::array();
  for (const auto& f : rep.fits) {
    ojson o;
    o["measurement"] = f.measurement;
    o["status"] = f.status;
    o["slope"] = num(f.fit.slope);
    o["constant"] = num(f.fit.constant);
    o["r2"] = num(f.fit.r2);
    o["points"] = f.fit.points;
    fits.push_back(o);
  }
  j["fits"] = fits;
  return j.dump(2) + "\n";
}

SweepReport report_from_json(const std::string& text) {
  SweepReport rep;
  try {
    const ojson j = ojson::parse(text);
    rep.problem = j.at("problem").get<std::string>();
    rep.mode = j.at("mode").get<std::string>();
    rep.dim = j.at("dim").get<int>();
    rep.oversampling = j.at("oversampling").get<int>();
    rep.torus_n = j.at("torus_n").get<int>();
    rep.measurements = j.at("measurements").get<std::vector<std::string>>();

    const ojson& eff = j.at("effective");
    EffectiveLinear& e = rep.effective;
    e.dim = eff.at("dim").get<int>();
    for (int k = 0; k < e.dim; ++k)
      for (int l = 0; l < e.dim; ++l) e.a_bar(k, l) = num(eff.at("a_bar").at(k).at(l));
    const auto b = nums(eff.at("b_bar"));
    for (int k = 0; k < e.dim && k < static_cast<int>(b.size()); ++k) e.b_bar[k] = b[k];
    e.c_bar = num(eff.at("c_bar"));
    e.a_bar_klm = nums(eff.at("a_bar_klm"));
    e.b_bar_kl = nums(eff.at("b_bar_kl"));
    e.c_bar_k = nums(eff.at("c_bar_k"));
    e.d_bar = num(eff.at("d_bar"));
    e.asymmetry_defect = num(eff.at("asymmetry_defect"));
    rep.effective_planes = nums(j.at("effective_planes"));

    for (const auto& o : j.at("rows")) {
      SweepRow r;
      r.m = o.at("m").get<long>();
      r.eps = num(o.at("eps"));
      r.n = o.at("n").get<int>();
      r.lambda_eps = num(o.at("lambda_eps"));
      r.lambda_bar = num(o.at("lambda_bar"));
      r.abs_err_lambda = num(o.at("abs_err_lambda"));
      r.eigfun_err = num(o.at("eigfun_err"));
      r.z_norm = num(o.at("z_norm"));
      r.v_norm = num(o.at("v_norm"));
      r.seconds = num(o.at("seconds"));
      r.pivot_err = num(o.at("pivot_err"));
      r.residual = num(o.at("residual"));
      r.t_eps = num(o.at("t_eps"));
      r.eigfun_err_direct = num(o.at("eigfun_err_direct"));
      r.eigfun_err_l2 = num(o.at("eigfun_err_l2"));
      r.cw_lower = num(o.at("cw_lower"));
      r.cw_upper = num(o.at("cw_upper"));
      r.iterations = o.at("iterations").get<int>();
      r.status = o.at("status").get<std::string>();
      rep.rows.push_back(r);
    }
    for (const auto& o : j.at("fits")) {
      MeasurementFit f;
      f.measurement = o.at("measurement").get<std::string>();
      f.status = o.at("status").get<std::string>();
      f.fit.slope = num(o.at("slope"));
      f.fit.constant = num(o.at("constant"));
      f.fit.r2 = num(o.at("r2"));
      f.fit.points = o.at("points").get<std::size_t>();
      rep.fits.push_back(f);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report JSON: ") + e.what());
  }
  return rep;
}

void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (format == ReportFormat::csv ? report_csv(report) : report_json(report));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

bool same_report(const SweepReport& a, const SweepReport& b) {
  if (a.problem != b.problem || a.mode != b.mode || a.dim != b.dim || a.oversampling != b.oversampling ||
      a.torus_n != b.torus_n || a.measurements != b.measurements)
    return false;
  const EffectiveLinear& x = a.effective;
  const EffectiveLinear& y = b.effective;
  if (x.dim != y.dim || !same(x.c_bar, y.c_bar) || !same(x.d_bar, y.d_bar) ||
      !same(x.asymmetry_defect, y.asymmetry_defect) || !same(x.a_bar_klm, y.a_bar_klm) ||
      !same(x.b_bar_kl, y.b_bar_kl) || !same(x.c_bar_k, y.c_bar_k))
    return false;
  for (int k = 0; k < x.dim; ++k) {
    if (!same(x.b_bar[k], y.b_bar[k])) return false;
    for (int l = 0; l < x.dim; ++l)
      if (!same(x.a_bar(k, l), y.a_bar(k, l))) return false;
  }
  if (!same(a.effective_planes, b.effective_planes)) return false;
  if (a.rows.size() != b.rows.size() || a.fits.size() != b.fits.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const SweepRow& r = a.rows[i];
    const SweepRow& s = b.rows[i];
    if (r.m != s.m || r.n != s.n || r.iterations != s.iterations || r.status != s.status) return false;
    const std::vector<double> u{r.eps, r.lambda_eps, r.lambda_bar, r.abs_err_lambda, r.eigfun_err, r.z_norm,
                                r.v_norm, r.seconds, r.pivot_err, r.residual, r.t_eps, r.eigfun_err_direct,
                                r.eigfun_err_l2, r.cw_lower, r.cw_upper};
    const std::vector<double> v{s.eps, s.lambda_eps, s.lambda_bar, s.abs_err_lambda, s.eigfun_err, s.z_norm,
                                s.v_norm, s.seconds, s.pivot_err, s.residual, s.t_eps, s.eigfun_err_direct,
                                s.eigfun_err_l2, s.cw_lower, s.cw_upper};
    if (!same(u, v)) return false;
  }
  for (std::size_t i = 0; i < a.fits.size(); ++i) {
    const auto& f = a.fits[i];
    const auto& g = b.fits[i];
    if (f.measurement != g.measurement || f.status != g.status || f.fit.points != g.fit.points ||
        !same(f.fit.slope, g.fit.slope) || !same(f.fit.constant, g.fit.constant) || !same(f.fit.r2, g.fit.r2))
      return false;
  }
  return true;
}

}  // namespace ergodica
