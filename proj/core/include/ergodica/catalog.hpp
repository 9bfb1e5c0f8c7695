#pragma once

#include "ergodica/coeff.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace ergodica {

CoefficientField make_constant_field(int dim, const Mat2& a, const Vec2& b = Vec2::Zero(),
                                     double c = 0.0);

/// 1D: a(y) = 1 + delta sin(2 pi y), b = c = 0.
CoefficientField make_one_plus_delta_sin(double delta);

struct SinAbcParams {
  double delta = 0.5;   // a = 1 + delta sin(2 pi y)
  double b0 = 0.5;      // b = b0 + b1 cos(2 pi y)
  double b1 = 1.0;
  double c1 = 0.5;      // c = c1 sin(2 pi y) + c2 cos(4 pi y)
  double c2 = 0.3;
};

/// 1D field with oscillatory diffusion, drift and zeroth-order terms.
CoefficientField make_sin_abc(const SinAbcParams& p = {});

/// 2D: a = diag(1 + delta sin(2 pi y1), 1 + delta sin(2 pi y2)), b = c = 0.
CoefficientField make_separable_sin(double delta);

/// One term coef * {cos|sin}(2 pi (k1 y1 + k2 y2)).
struct TrigTerm {
  double coef = 0.0;
  int k1 = 0;
  int k2 = 0;
  bool sine = false;
};

/// Trigonometric-polynomial field; each entry is a sum of TrigTerms.
/// Entry order: a11, a12, a22, b1, b2, c.
struct TrigFieldSpec {
  int dim = 1;
  std::array<std::vector<TrigTerm>, 6> entries;
};

CoefficientField make_trig_field(const TrigFieldSpec& spec);

/// Field sampled on a regular n (or n x n) grid of [0,1)^dim, evaluated by
/// periodic cubic interpolation.
struct TabulatedField {
  int dim = 1;
  int n = 0;
  std::vector<CoefficientSample> samples;  // index i1 + n * i2
};

CoefficientField make_tabulated_field(TabulatedField table);

/// Reads a CSV with columns y1,a11,b1,c (1D) or y1,y2,a11,a12,a22,b1,b2,c
/// (2D). A header row is optional. Rows may come in any order but must
/// cover a full regular grid.
TabulatedField load_tabulated_field(const std::filesystem::path& path);

}  // namespace ergodica
