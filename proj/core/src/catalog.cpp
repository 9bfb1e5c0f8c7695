#include "ergodica/catalog.hpp"

#include "ergodica/errors.hpp"
#include "periodic_interp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace ergodica {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CoefficientField make_constant_field(int dim, const Mat2& a, const Vec2& b, double c) {
  if (dim != 1 && dim != 2) throw InputError("field dimension must be 1 or 2");
  CoefficientSample s;
  s.a = a;
  s.b = b;
  s.c = c;
  if (dim == 1) {
    s.a(0, 1) = s.a(1, 0) = s.a(1, 1) = 0.0;
    s.b[1] = 0.0;
  }
  CoefficientField f;
  f.dim = dim;
  f.name = "constant";
  f.constant = true;
  f.eval = [s](const Vec2&) { return s; };
  return f;
}

CoefficientField make_one_plus_delta_sin(double delta) {
  if (!(std::abs(delta) < 1.0)) throw InputError("one_plus_delta_sin needs |delta| < 1");
  CoefficientField f;
  f.dim = 1;
  f.name = "one_plus_delta_sin";
  f.eval = [delta](const Vec2& y) {
    CoefficientSample s;
    s.a(0, 0) = 1.0 + delta * std::sin(kTwoPi * y[0]);
    return s;
  };
  return f;
}

CoefficientField make_sin_abc(const SinAbcParams& p) {
  if (!(std::abs(p.delta) < 1.0)) throw InputError("sin_abc needs |delta| < 1");
  CoefficientField f;
  f.dim = 1;
  f.name = "sin_abc";
  f.eval = [p](const Vec2& y) {
    const double t = kTwoPi * y[0];
    CoefficientSample s;
    s.a(0, 0) = 1.0 + p.delta * std::sin(t);
    s.b[0] = p.b0 + p.b1 * std::cos(t);
    s.c = p.c1 * std::sin(t) + p.c2 * std::cos(2.0 * t);
    return s;
  };
  return f;
}

CoefficientField make_separable_sin(double delta) {
  if (!(std::abs(delta) < 1.0)) throw InputError("separable_sin needs |delta| < 1");
  CoefficientField f;
  f.dim = 2;
  f.name = "separable_sin";
  f.eval = [delta](const Vec2& y) {
    CoefficientSample s;
    s.a(0, 0) = 1.0 + delta * std::sin(kTwoPi * y[0]);
    s.a(1, 1) = 1.0 + delta * std::sin(kTwoPi * y[1]);
    return s;
  };
  return f;
}

CoefficientField make_trig_field(const TrigFieldSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) throw InputError("trig field dimension must be 1 or 2");
  for (std::size_t e = 0; e < spec.entries.size(); ++e) {
    for (const auto& term : spec.entries[e]) {
      if (spec.dim == 1 && term.k2 != 0)
        throw InputError("trig field: k2 must be 0 in one dimension");
    }
  }
  if (spec.dim == 1) {
    for (std::size_t e : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
      if (!spec.entries[e].empty())
        throw InputError("trig field: a12, a22, b2 must be empty in one dimension");
    }
  }
  CoefficientField f;
  f.dim = spec.dim;
  f.name = "trig";
  f.constant = std::all_of(spec.entries.begin(), spec.entries.end(), [](const auto& terms) {
    return std::all_of(terms.begin(), terms.end(), [](const TrigTerm& t) {
      return (t.k1 == 0 && t.k2 == 0) || t.coef == 0.0;
    });
  });
  f.eval = [spec](const Vec2& y) {
    auto sum = [&](const std::vector<TrigTerm>& terms) {
      double v = 0.0;
      for (const auto& t : terms) {
        const double phase = kTwoPi * (t.k1 * y[0] + t.k2 * y[1]);
        v += t.coef * (t.sine ? std::sin(phase) : std::cos(phase));
      }
      return v;
    };
    CoefficientSample s;
    s.a(0, 0) = sum(spec.entries[0]);
    s.a(0, 1) = s.a(1, 0) = sum(spec.entries[1]);
    s.a(1, 1) = sum(spec.entries[2]);
    s.b[0] = sum(spec.entries[3]);
    s.b[1] = sum(spec.entries[4]);
    s.c = sum(spec.entries[5]);
    return s;
  };
  return f;
}

CoefficientField make_tabulated_field(TabulatedField table) {
  if (table.dim != 1 && table.dim != 2) throw InputError("tabulated field dimension must be 1 or 2");
  if (table.n < 4) throw InputError("tabulated field needs at least 4 samples per axis");
  const std::size_t expected =
      table.dim == 1 ? static_cast<std::size_t>(table.n)
                     : static_cast<std::size_t>(table.n) * static_cast<std::size_t>(table.n);
  if (table.samples.size() != expected) throw InputError("tabulated field: sample count mismatch");

  auto shared = std::make_shared<const TabulatedField>(std::move(table));
  CoefficientField f;
  f.dim = shared->dim;
  f.name = "tabulated";
  f.eval = [shared](const Vec2& y_raw) {
    const TabulatedField& t = *shared;
    const Vec2 y = wrap_to_torus(y_raw, t.dim);
    auto component = [&](auto pick) {
      return detail::periodic_cubic_eval(t.dim, t.n, y[0], y[1],
                                         [&](int idx) { return pick(t.samples[idx]); });
    };
    CoefficientSample s;
    s.a(0, 0) = component([](const CoefficientSample& c) { return c.a(0, 0); });
    s.b[0] = component([](const CoefficientSample& c) { return c.b[0]; });
    s.c = component([](const CoefficientSample& c) { return c.c; });
    if (t.dim == 2) {
      s.a(0, 1) = s.a(1, 0) = component([](const CoefficientSample& c) { return c.a(0, 1); });
      s.a(1, 1) = component([](const CoefficientSample& c) { return c.a(1, 1); });
      s.b[1] = component([](const CoefficientSample& c) { return c.b[1]; });
    }
    return s;
  };
  return f;
}

TabulatedField load_tabulated_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tabulated field: " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw InputError("tabulated field: non-numeric row: " + line);
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InputError("tabulated field: no data rows in " + path.string());

  const std::size_t cols = rows.front().size();
  TabulatedField t;
  if (cols == 4)
    t.dim = 1;
  else if (cols == 8)
    t.dim = 2;
  else
    throw InputError("tabulated field: expected 4 (1D) or 8 (2D) columns");

  const std::size_t count = rows.size();
  const int n = t.dim == 1 ? static_cast<int>(count)
                           : static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
  if (t.dim == 2 && static_cast<std::size_t>(n) * n != count)
    throw InputError("tabulated field: 2D sample count is not a perfect square");
  t.n = n;
  t.samples.assign(count, CoefficientSample{});
  std::vector<bool> seen(count, false);

  auto node = [n](double y) {
    const double s = y * n;
    const long i = std::lround(s);
    if (std::abs(s - static_cast<double>(i)) > 1e-6 || i < 0 || i >= n)
      throw InputError("tabulated field: coordinate not on the regular grid [0,1)");
    return static_cast<int>(i);
  };

  for (const auto& r : rows) {
    if (r.size() != cols) throw InputError("tabulated field: ragged row");
    CoefficientSample s;
    std::size_t idx = 0;
    if (t.dim == 1) {
      idx = node(r[0]);
      s.a(0, 0) = r[1];
      s.b[0] = r[2];
      s.c = r[3];
    } else {
      idx = node(r[0]) + static_cast<std::size_t>(n) * node(r[1]);
      s.a(0, 0) = r[2];
      s.a(0, 1) = s.a(1, 0) = r[3];
      s.a(1, 1) = r[4];
      s.b[0] = r[5];
      s.b[1] = r[6];
      s.c = r[7];
    }
    if (seen[idx]) throw InputError("tabulated field: duplicate grid point");
    seen[idx] = true;
    t.samples[idx] = s;
  }
  return t;
}

}  // namespace ergodica
