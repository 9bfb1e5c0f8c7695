#include "ergodica/coeff.hpp"

#include "ergodica/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ergodica {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Eigenvalues of the leading dim x dim block of a symmetric matrix.
Eigen::Vector2d sym_eigenvalues(const Mat2& X, int dim) {
  if (dim == 1) return {X(0, 0), X(0, 0)};
  Eigen::SelfAdjointEigenSolver<Mat2> es(X, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double frob(const Mat2& X) { return X.norm(); }

}  // namespace

Vec2 wrap_to_torus(const Vec2& y, int dim) {
  Vec2 out = Vec2::Zero();
  for (int k = 0; k < dim; ++k) {
    double v = y[k] - std::floor(y[k]);
    if (v >= 1.0) v = 0.0;
    out[k] = v;
  }
  return out;
}

void check_spec(const LinearOperatorSpec& spec) {
  if (spec.field.dim != 1 && spec.field.dim != 2)
    throw InputError("coefficient field dimension must be 1 or 2");
  if (!spec.field.eval) throw InputError("coefficient field has no evaluator");
  if (!(spec.lambda_ell > 0.0) || !(spec.lambda_ell <= spec.Lambda_ell))
    throw InputError("ellipticity constants must satisfy 0 < lambda <= Lambda");
  if (spec.c1 < 0.0 || spec.c2 < 0.0) throw InputError("Lipschitz bounds C1, C2 must be >= 0");
}

int BellmanSpec::dim() const { return controls.empty() ? 0 : controls.front().dim(); }

void check_spec(const BellmanSpec& spec) {
  if (spec.controls.empty()) throw ConfigError("Bellman spec has an empty control list");
  const auto& first = spec.controls.front();
  for (const auto& ctl : spec.controls) {
    check_spec(ctl);
    if (ctl.dim() != first.dim()) throw InputError("Bellman controls have mismatched dimensions");
    if (ctl.lambda_ell != first.lambda_ell || ctl.Lambda_ell != first.Lambda_ell)
      throw InputError("Bellman controls must share one ellipticity interval");
  }
}

double eval_pucci(const PucciSpec& spec, const Mat2& X, int dim) {
  if (!(spec.lambda_ell > 0.0) || !(spec.lambda_ell <= spec.Lambda_ell))
    throw InputError("Pucci constants must satisfy 0 < lambda <= Lambda");
  if (dim == 2 && std::abs(X(0, 1) - X(1, 0)) > kSymmetryTol * std::max(1.0, frob(X)))
    throw InputError("eval_pucci: matrix is not symmetric");
  const Eigen::Vector2d ev = sym_eigenvalues(X, dim);
  double pos = 0.0;
  double neg = 0.0;
  for (int i = 0; i < dim; ++i) {
    if (ev[i] > 0.0)
      pos += ev[i];
    else
      neg -= ev[i];
  }
  if (spec.sign == PucciSign::plus) return spec.Lambda_ell * pos - spec.lambda_ell * neg;
  return spec.lambda_ell * pos - spec.Lambda_ell * neg;
}

double eval_bellman(const BellmanSpec& spec, const Vec2& y, double r, const Vec2& p,
                    const Mat2& X, std::size_t& argmax) {
  if (spec.controls.empty()) throw ConfigError("Bellman spec has an empty control list");
  double best = -std::numeric_limits<double>::infinity();
  argmax = 0;
  for (std::size_t k = 0; k < spec.controls.size(); ++k) {
    const double v = apply_sample(spec.controls[k].field(y), r, p, X);
    if (v > best) {
      best = v;
      argmax = k;
    }
  }
  return best;
}

double eval_bellman(const BellmanSpec& spec, const Vec2& y, double r, const Vec2& p,
                    const Mat2& X) {
  std::size_t unused = 0;
  return eval_bellman(spec, y, r, p, X, unused);
}

BellmanSpec pucci_as_bellman_1d(const PucciSpec& spec) {
  auto constant_control = [&](double a) {
    LinearOperatorSpec ctl;
    ctl.field.dim = 1;
    ctl.field.constant = true;
    ctl.field.name = "pucci_endpoint";
    ctl.field.eval = [a](const Vec2&) {
      CoefficientSample s;
      s.a(0, 0) = a;
      return s;
    };
    ctl.lambda_ell = spec.lambda_ell;
    ctl.Lambda_ell = spec.Lambda_ell;
    return ctl;
  };
  BellmanSpec out;
  // M^+ picks Lambda on positive curvature, lambda on negative; M^- the reverse.
  // The sup over {lambda, Lambda} realizes M^+; M^- is not of sup form.
  if (spec.sign == PucciSign::minus)
    throw InputError("M^- is concave (inf form); only M^+ maps to a convex Bellman spec");
  out.controls.push_back(constant_control(spec.lambda_ell));
  if (spec.Lambda_ell != spec.lambda_ell) out.controls.push_back(constant_control(spec.Lambda_ell));
  return out;
}

StructureReport validate_structure(const LinearOperatorSpec& spec, std::size_t sample_count,
                                   std::uint64_t seed, double tol) {
  check_spec(spec);
  if (sample_count == 0) throw InputError("validate_structure: sample_count must be >= 1");

  const int d = spec.dim();
  StructureReport report;
  report.samples = sample_count;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> alpha_dist(0.0, 3.0);

  auto rand_point = [&] {
    Vec2 y = Vec2::Zero();
    for (int k = 0; k < d; ++k) y[k] = unit(rng);
    return y;
  };
  auto rand_vec = [&] {
    Vec2 v = Vec2::Zero();
    for (int k = 0; k < d; ++k) v[k] = sym(rng);
    return v;
  };
  auto rand_sym = [&] {
    Mat2 m = Mat2::Zero();
    m(0, 0) = sym(rng);
    if (d == 2) {
      m(1, 1) = sym(rng);
      m(0, 1) = m(1, 0) = sym(rng);
    }
    return m;
  };
  auto add = [&](std::string kind, const Vec2& y, double excess, std::string detail) {
    report.violations.push_back({std::move(kind), y, excess, std::move(detail)});
  };

  const PucciSpec plus{spec.lambda_ell, spec.Lambda_ell, PucciSign::plus};
  const PucciSpec minus{spec.lambda_ell, spec.Lambda_ell, PucciSign::minus};

  for (std::size_t s = 0; s < sample_count; ++s) {
    const Vec2 y = rand_point();
    const CoefficientSample cs = spec.field(y);

    ++report.checks;
    if (d == 2 && std::abs(cs.a(0, 1) - cs.a(1, 0)) > tol)
      add("symmetry", y, std::abs(cs.a(0, 1) - cs.a(1, 0)), "a(y) is not symmetric");

    ++report.checks;
    const Eigen::Vector2d ev = sym_eigenvalues(0.5 * (cs.a + cs.a.transpose()), d);
    const double lo = ev.head(d).minCoeff();
    const double hi = ev.head(d).maxCoeff();
    if (lo < spec.lambda_ell - tol || hi > spec.Lambda_ell + tol) {
      std::ostringstream os;
      os << "spectrum [" << lo << ", " << hi << "] outside [" << spec.lambda_ell << ", "
         << spec.Lambda_ell << "]";
      add("ellipticity", y, std::max(spec.lambda_ell - lo, hi - spec.Lambda_ell), os.str());
    }

    for (int k = 0; k < d; ++k) {
      ++report.checks;
      Vec2 shifted = y;
      shifted[k] += 1.0;
      const CoefficientSample cp = spec.field(shifted);
      const double gap = std::max({(cp.a - cs.a).cwiseAbs().maxCoeff(),
                                   (cp.b - cs.b).cwiseAbs().maxCoeff(), std::abs(cp.c - cs.c)});
      if (gap > tol) add("periodicity", y, gap, "field differs at y and y + e_k");
    }

    // Two-sided structure bound on increments (q, s, Y) at fixed y.
    const double r = sym(rng);
    const Vec2 p = rand_vec();
    const Mat2 X = rand_sym();
    const double ds = sym(rng);
    const Vec2 dq = rand_vec();
    const Mat2 dY = rand_sym();
    const double diff = apply_sample(cs, r + ds, p + dq, X + dY) - apply_sample(cs, r, p, X);
    const double slack = spec.c1 * (dq.norm() + std::abs(ds));
    const double upper = eval_pucci(plus, dY, d) + slack;
    const double lower = eval_pucci(minus, dY, d) - slack;
    ++report.checks;
    if (diff > upper + tol || diff < lower - tol) {
      std::ostringstream os;
      os << "increment " << diff << " outside [" << lower << ", " << upper << "]";
      add("pucci_bound", y, std::max(diff - upper, lower - diff), os.str());
    }

    // Positive 1-homogeneity, always including alpha = 0.
    for (double alpha : {0.0, alpha_dist(rng)}) {
      ++report.checks;
      const double lhs = apply_sample(cs, alpha * r, alpha * p, alpha * X);
      const double rhs = alpha * apply_sample(cs, r, p, X);
      const double gap = std::abs(lhs - rhs);
      if (gap > tol * std::max(1.0, std::abs(rhs))) {
        add("homogeneity", y, gap, "F(alpha r, alpha p, alpha X) != alpha F(r, p, X)");
      }
    }
  }
  return report;
}

}  // namespace ergodica
