#pragma once

#include <array>
#include <cmath>

namespace ergodica::detail {

/// Four-point Lagrange stencil on a periodic grid of n points with spacing
/// 1/n. `first` is the (possibly negative) index of the leftmost node; the
/// weights reproduce cubics exactly and return node values exactly when y
/// sits on a node.
struct CubicStencil {
  long first = 0;
  std::array<double, 4> w{};
};

inline CubicStencil periodic_cubic_stencil(double y, int n) {
  const double s = y * n;
  const double base = std::floor(s);
  const double t = s - base;
  CubicStencil st;
  st.first = static_cast<long>(base) - 1;
  // Nodes at offsets -1, 0, 1, 2 relative to base.
  st.w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  st.w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  st.w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  st.w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  return st;
}

inline int wrap_index(long i, int n) {
  long r = i % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

/// Evaluates a periodic grid function (index i1 + n*i2) at y.
template <class Get>
double periodic_cubic_eval(int dim, int n, double y1, double y2, Get&& get) {
  const CubicStencil s1 = periodic_cubic_stencil(y1, n);
  if (dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (s1.w[a] != 0.0) v += s1.w[a] * get(wrap_index(s1.first + a, n));
    }
    return v;
  }
  const CubicStencil s2 = periodic_cubic_stencil(y2, n);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    if (s2.w[b] == 0.0) continue;
    const int j = wrap_index(s2.first + b, n);
    double row = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (s1.w[a] != 0.0) row += s1.w[a] * get(wrap_index(s1.first + a, n) + n * j);
    }
    v += s2.w[b] * row;
  }
  return v;
}

}  // namespace ergodica::detail
