#include "ergodica/corrector.hpp"
#include "ergodica/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace ergodica {

std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  if (n == 0 || m < 0 || m >= n) throw InputError("fd_weights: need more nodes than the derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

namespace {

struct AxisStencil {
  int start = 0;  // first node of the window
  std::vector<double> w;
};

// Per-position stencils for the k-th derivative on a line of `count` nodes.
std::vector<AxisStencil> line_stencils(int count, int k, double h) {
  const int r = (k + 1) / 2 + 1;
  const int centred = 2 * r + 1;
  const int shifted = k + 4;
  if (count < std::max(centred, shifted))
    throw InputError("derivative_bundle: grid too coarse for the fourth-order stencil");
  std::map<std::pair<int, int>, std::vector<double>> cache;  // (offset of start, size)
  std::vector<AxisStencil> out(static_cast<std::size_t>(count));
  const double scale = std::pow(h, -k);
  for (int i = 0; i < count; ++i) {
    int start;
    int size;
    if (i - r >= 0 && i + r < count) {
      start = i - r;
      size = centred;
    } else {
      size = shifted;
      start = std::clamp(i - size / 2, 0, count - size);
    }
    auto key = std::make_pair(start - i, size);
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<double> x(static_cast<std::size_t>(size));
      for (int j = 0; j < size; ++j) x[static_cast<std::size_t>(j)] = start - i + j;
      std::vector<double> w = fd_weights(0.0, x, k);
      for (double& v : w) v *= scale;
      it = cache.emplace(key, std::move(w)).first;
    }
    out[static_cast<std::size_t>(i)] = {start, it->second};
  }
  return out;
}

DomainFunction apply_axis(const DomainGrid& grid, const DomainFunction& f, int axis, int k) {
  const int nx = static_cast<int>(grid.nodes_per_axis(0));
  const int ny = grid.dim == 2 ? static_cast<int>(grid.nodes_per_axis(1)) : 1;
  const int count = axis == 0 ? nx : ny;
  const auto st = line_stencils(count, k, grid.h(axis));
  DomainFunction out(f.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int pos = axis == 0 ? i : j;
      const AxisStencil& s = st[static_cast<std::size_t>(pos)];
      double acc = 0.0;
      for (std::size_t q = 0; q < s.w.size(); ++q) {
        const int p = s.start + static_cast<int>(q);
        const std::size_t node = axis == 0 ? grid.node(p, j) : grid.node(i, p);
        acc += s.w[q] * f[static_cast<Eigen::Index>(node)];
      }
      out[static_cast<Eigen::Index>(grid.node(i, j))] = acc;
    }
  }
  return out;
}

}  // namespace

DerivativeBundle derivative_bundle(const DomainGrid& grid, const DomainFunction& u, int order) {
  if (order < 0 || order > 3) throw InputError("derivative_bundle: order must be in 0..3");
  if (u.size() != static_cast<Eigen::Index>(grid.node_count()))
    throw InputError("derivative_bundle: expects a full node vector");
  const int d = grid.dim;
  DerivativeBundle b;
  b.grid = grid;
  b.order = order;
  b.u = u;
  if (order >= 1) {
    for (int k = 0; k < d; ++k) b.d1.push_back(apply_axis(grid, u, k, 1));
  }
  if (order >= 2) {
    b.d2.resize(static_cast<std::size_t>(d * d));
    for (int k = 0; k < d; ++k) b.d2[k * d + k] = apply_axis(grid, u, k, 2);
    if (d == 2) {
      b.d2[1] = apply_axis(grid, b.d1[1], 0, 1);
      b.d2[2] = b.d2[1];
    }
  }
  if (order >= 3) {
    b.d3.resize(static_cast<std::size_t>(d * d * d));
    // by_count[c]: third derivative with c factors along axis 0
    std::array<DomainFunction, 4> by_count;
    if (d == 1) {
      b.d3[0] = apply_axis(grid, u, 0, 3);
    } else {
      by_count[3] = apply_axis(grid, u, 0, 3);
      by_count[2] = apply_axis(grid, b.d1[1], 0, 2);
      by_count[1] = apply_axis(grid, b.d2[3], 0, 1);
      by_count[0] = apply_axis(grid, u, 1, 3);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 2; ++m) b.d3[(k * 2 + l) * 2 + m] = by_count[(k == 0) + (l == 0) + (m == 0)];
    }
  }
  return b;
}

DomainFunction torus_trace(const PeriodicGrid& torus, const Vector& values, const DomainGrid& grid,
                           double eps) {
  if (torus.dim != grid.dim) throw InputError("torus_trace: dimension mismatch");
  DomainFunction out(static_cast<Eigen::Index>(grid.node_count()));
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    out[static_cast<Eigen::Index>(n)] = torus_interpolate(torus, values, fast_variable(grid, n, eps));
  return out;
}

}  // namespace ergodica
