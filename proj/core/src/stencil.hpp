#pragma once

#include "ergodica/coeff.hpp"

#include <array>
#include <cmath>

namespace ergodica::detail {

struct StencilEntry {
  int dx = 0;
  int dy = 0;
  double w = 0.0;
};

/// Up to nine entries of a finite-difference stencil centred at (0,0).
struct Stencil {
  std::array<StencilEntry, 9> entries{};
  int size = 0;

  void add(int dx, int dy, double w) {
    for (int i = 0; i < size; ++i) {
      if (entries[i].dx == dx && entries[i].dy == dy) {
        entries[i].w += w;
        return;
      }
    }
    entries[size++] = {dx, dy, w};
  }
};

/// Appends a : D^2 using three-point second differences and, when a12 != 0,
/// the monotone seven-point mixed stencil that keeps every off-diagonal
/// weight nonnegative. Returns the dominance slack
/// min(a11 hy/hx, a22 hx/hy) - |a12| (negative means a negative weight).
inline double add_diffusion(Stencil& st, const Mat2& a, double hx, double hy, int dim) {
  const double a11 = a(0, 0);
  if (dim == 1) {
    const double w = a11 / (hx * hx);
    st.add(-1, 0, w);
    st.add(1, 0, w);
    st.add(0, 0, -2.0 * w);
    return a11;
  }
  const double a22 = a(1, 1);
  const double a12 = 0.5 * (a(0, 1) + a(1, 0));
  const double m = std::abs(a12) / (hx * hy);
  const double wx = a11 / (hx * hx) - m;
  const double wy = a22 / (hy * hy) - m;
  st.add(-1, 0, wx);
  st.add(1, 0, wx);
  st.add(0, -1, wy);
  st.add(0, 1, wy);
  if (a12 > 0.0) {
    st.add(1, 1, m);
    st.add(-1, -1, m);
  } else if (a12 < 0.0) {
    st.add(1, -1, m);
    st.add(-1, 1, m);
  }
  st.add(0, 0, -2.0 * (wx + wy) - 2.0 * m);
  return std::min(a11 * hy / hx, a22 * hx / hy) - std::abs(a12);
}

}  // namespace ergodica::detail
