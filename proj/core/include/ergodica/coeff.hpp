#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ergodica {

// Points, vectors and symmetric matrices are stored in fixed 2x2 / 2-vector
// containers. In one dimension only the (0,0) / (0) entries are used and the
// rest stay zero.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Coefficients of a(y):D^2 + b(y).D + c(y) at one point.
struct CoefficientSample {
  Mat2 a = Mat2::Zero();
  Vec2 b = Vec2::Zero();
  double c = 0.0;
};

/// Unit-periodic coefficient field y -> (a(y), b(y), c(y)) on the torus.
struct CoefficientField {
  int dim = 1;
  std::string name;
  std::function<CoefficientSample(const Vec2&)> eval;
  /// True when the field does not depend on y (lets callers skip work).
  bool constant = false;

  CoefficientSample operator()(const Vec2& y) const { return eval(y); }
};

/// Wraps y into [0,1)^dim.
Vec2 wrap_to_torus(const Vec2& y, int dim);

struct LinearOperatorSpec {
  CoefficientField field;
  double lambda_ell = 1.0;
  double Lambda_ell = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;

  int dim() const { return field.dim; }
};

/// Throws InputError when the ellipticity constants or Lipschitz bounds are
/// out of range. Does not sample the field.
void check_spec(const LinearOperatorSpec& spec);

enum class PucciSign { plus, minus };

struct PucciSpec {
  double lambda_ell = 1.0;
  double Lambda_ell = 1.0;
  PucciSign sign = PucciSign::plus;
};

/// Convex (sup-form) Bellman operator over a finite control list.
struct BellmanSpec {
  std::vector<LinearOperatorSpec> controls;

  int dim() const;
  std::size_t size() const { return controls.size(); }
};

/// Throws ConfigError for an empty control list, InputError for mismatched
/// dimensions or ellipticity intervals.
void check_spec(const BellmanSpec& spec);

/// Extremal Pucci operator M^+ / M^- evaluated on the leading dim x dim block
/// of X.
double eval_pucci(const PucciSpec& spec, const Mat2& X, int dim);

/// max over controls of tr(a(y) X) + b(y).p + c(y) r.
double eval_bellman(const BellmanSpec& spec, const Vec2& y, double r, const Vec2& p,
                    const Mat2& X);

/// Same as eval_bellman, also returning the index of the maximizing control
/// (lowest index among ties).
double eval_bellman(const BellmanSpec& spec, const Vec2& y, double r, const Vec2& p,
                    const Mat2& X, std::size_t& argmax);

/// Linear operator value tr(a X) + b.p + c r for one coefficient sample.
inline double apply_sample(const CoefficientSample& s, double r, const Vec2& p,
                           const Mat2& X) {
  return (s.a.cwiseProduct(X)).sum() + s.b.dot(p) + s.c * r;
}

/// Pucci operators as a two-control Bellman spec. Only exact in 1D, where the
/// admissible set [lambda, Lambda] has the two endpoints as extreme points.
BellmanSpec pucci_as_bellman_1d(const PucciSpec& spec);

struct StructureViolation {
  std::string kind;  // "symmetry", "ellipticity", "periodicity", "pucci_bound", "homogeneity"
  Vec2 y = Vec2::Zero();
  double excess = 0.0;
  std::string detail;
};

struct StructureReport {
  std::size_t samples = 0;
  std::size_t checks = 0;
  std::vector<StructureViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Sample-based check of symmetry, ellipticity, periodicity, the two-sided
/// Pucci structure bound and positive 1-homogeneity. Violations are report
/// content; this never throws for a valid spec.
StructureReport validate_structure(const LinearOperatorSpec& spec, std::size_t sample_count,
                                   std::uint64_t seed = 1, double tol = 1e-10);

}  // namespace ergodica
