#include "ergodica/problem.hpp"

#include "ergodica/catalog.hpp"
#include "ergodica/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergodica {

namespace {

template <class F>
void for_each_sample(const CoefficientField& field, int n, F&& f) {
  const int ny = field.dim == 2 ? n : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < n; ++i) f(field(Vec2(static_cast<double>(i) / n, static_cast<double>(j) / n)));
}

}  // namespace

std::pair<double, double> sampled_ellipticity(const CoefficientField& field, int n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for_each_sample(field, n, [&](const CoefficientSample& s) {
    if (field.dim == 1) {
      lo = std::min(lo, s.a(0, 0));
      hi = std::max(hi, s.a(0, 0));
    } else {
      const Eigen::SelfAdjointEigenSolver<Mat2> es(s.a);
      lo = std::min(lo, es.eigenvalues()[0]);
      hi = std::max(hi, es.eigenvalues()[1]);
    }
  });
  return {lo, hi};
}

double sampled_lower_order_bound(const CoefficientField& field, int n) {
  double c1 = 0.0;
  for_each_sample(field, n, [&](const CoefficientSample& s) {
    c1 = std::max({c1, s.b.norm(), std::abs(s.c)});
  });
  return c1;
}

Problem make_linear_problem(std::string name, CoefficientField field, double lambda_ell,
                            double Lambda_ell, double c1) {
  Problem p;
  p.name = std::move(name);
  p.dim = field.dim;
  p.mode = ProblemMode::linear;
  p.linear.field = std::move(field);
  p.linear.lambda_ell = lambda_ell;
  p.linear.Lambda_ell = Lambda_ell;
  p.linear.c1 = c1;
  check_spec(p.linear);
  return p;
}

Problem make_bellman_problem(std::string name, std::vector<LinearOperatorSpec> controls) {
  Problem p;
  p.name = std::move(name);
  p.mode = ProblemMode::bellman;
  p.bellman.controls = std::move(controls);
  check_spec(p.bellman);
  p.dim = p.bellman.dim();
  return p;
}

std::vector<std::string> catalog_names() {
  return {"constant", "sin-a", "sin-abc", "sep-2d", "pucci-1d", "bellman-2ctl-1d"};
}

Problem catalog_problem(const std::string& name) {
  if (name == "constant")
    return make_linear_problem(name, make_constant_field(1, Mat2::Identity()), 1.0, 1.0);
  if (name == "sin-a") return make_linear_problem(name, make_one_plus_delta_sin(0.5), 0.5, 1.5);
  if (name == "sin-abc") return make_linear_problem(name, make_sin_abc(), 0.5, 1.5, 1.5);
  if (name == "sep-2d") return make_linear_problem(name, make_separable_sin(0.5), 0.5, 1.5);
  if (name == "pucci-1d") {
    Problem p = make_bellman_problem(name, pucci_as_bellman_1d({1.0, 2.0, PucciSign::plus}).controls);
    return p;
  }
  if (name == "bellman-2ctl-1d") {
    LinearOperatorSpec a1{make_one_plus_delta_sin(0.5), 0.5, 1.5, 0.0, 0.0};
    Mat2 a2 = Mat2::Zero();
    a2(0, 0) = 1.2;
    LinearOperatorSpec c2{make_constant_field(1, a2), 0.5, 1.5, 0.0, 0.0};
    return make_bellman_problem(name, {a1, c2});
  }
  std::string known;
  for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown catalog problem '" + name + "' (known: " + known + ")");
}

const char* to_string(ProblemMode mode) { return mode == ProblemMode::linear ? "linear" : "bellman"; }

}  // namespace ergodica
