#include "ergodica/domain.hpp"

#include "ergodica/errors.hpp"
#include "stencil.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergodica {

DomainGrid::DomainGrid(int dim_, int n_) : DomainGrid(dim_, Vec2::Zero(), Vec2::Ones(), {n_, n_}) {}

DomainGrid::DomainGrid(int dim_, const Vec2& lower_, const Vec2& upper_, std::array<int, 2> n_)
    : dim(dim_), lower(lower_), upper(upper_), n(n_) {
  if (dim != 1 && dim != 2) throw InputError("domain grid dimension must be 1 or 2");
  if (dim == 1) {
    n[1] = 0;
    lower[1] = 0.0;
    upper[1] = 0.0;
  }
  for (int k = 0; k < dim; ++k) {
    if (n[k] < 2) throw InputError("domain grid needs at least 2 intervals per axis");
    if (!(upper[k] > lower[k])) throw InputError("domain grid needs lower < upper on every axis");
  }
}

std::size_t DomainGrid::node_count() const {
  return dim == 1 ? nodes_per_axis(0) : nodes_per_axis(0) * nodes_per_axis(1);
}

std::size_t DomainGrid::interior_count() const {
  return dim == 1 ? static_cast<std::size_t>(n[0] - 1)
                  : static_cast<std::size_t>(n[0] - 1) * static_cast<std::size_t>(n[1] - 1);
}

Vec2 DomainGrid::point(std::size_t node) const {
  const std::size_t nx = nodes_per_axis(0);
  Vec2 x = Vec2::Zero();
  x[0] = lower[0] + static_cast<double>(node % nx) * h(0);
  if (dim == 2) x[1] = lower[1] + static_cast<double>(node / nx) * h(1);
  return x;
}

bool DomainGrid::on_boundary(std::size_t node) const {
  const std::size_t nx = nodes_per_axis(0);
  const std::size_t i = node % nx;
  if (i == 0 || i == static_cast<std::size_t>(n[0])) return true;
  if (dim == 2) {
    const std::size_t j = node / nx;
    if (j == 0 || j == static_cast<std::size_t>(n[1])) return true;
  }
  return false;
}

long DomainGrid::interior_index(std::size_t node) const {
  if (on_boundary(node)) return -1;
  const std::size_t nx = nodes_per_axis(0);
  const std::size_t i = node % nx;
  if (dim == 1) return static_cast<long>(i - 1);
  const std::size_t j = node / nx;
  return static_cast<long>((i - 1) + (j - 1) * static_cast<std::size_t>(n[0] - 1));
}

std::size_t DomainGrid::interior_node(std::size_t interior) const {
  if (dim == 1) return interior + 1;
  const std::size_t mx = static_cast<std::size_t>(n[0] - 1);
  return node(static_cast<int>(interior % mx) + 1, static_cast<int>(interior / mx) + 1);
}

double DomainGrid::cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }

Vector restrict_to_interior(const DomainGrid& grid, const DomainFunction& full) {
  if (full.size() != static_cast<Eigen::Index>(grid.node_count()))
    throw InputError("restrict_to_interior: size mismatch");
  Vector out(static_cast<Eigen::Index>(grid.interior_count()));
  for (std::size_t k = 0; k < grid.interior_count(); ++k)
    out[static_cast<Eigen::Index>(k)] = full[static_cast<Eigen::Index>(grid.interior_node(k))];
  return out;
}

DomainFunction extend_by_zero(const DomainGrid& grid, const Vector& interior) {
  if (interior.size() != static_cast<Eigen::Index>(grid.interior_count()))
    throw InputError("extend_by_zero: size mismatch");
  DomainFunction out = DomainFunction::Zero(static_cast<Eigen::Index>(grid.node_count()));
  for (std::size_t k = 0; k < grid.interior_count(); ++k)
    out[static_cast<Eigen::Index>(grid.interior_node(k))] = interior[static_cast<Eigen::Index>(k)];
  return out;
}

Vector DiscreteOperator::apply(const DomainFunction& full) const {
  if (full.size() != static_cast<Eigen::Index>(grid.node_count()))
    throw InputError("DiscreteOperator::apply: expects a full node vector");
  return matrix * restrict_to_interior(grid, full) + boundary * full;
}

double DiscreteOperator::properness_shift() const { return std::max(0.0, max_c) + 1.0; }

DiscreteOperator assemble_operator(const DomainGrid& grid, const NodeCoefficients& coeff,
                                   double eps_tag, const AssemblyOptions& opts) {
  const int d = grid.dim;
  const double hx = grid.h(0);
  const double hy = d == 2 ? grid.h(1) : 1.0;
  const std::size_t M = grid.interior_count();
  const std::size_t nx = grid.nodes_per_axis(0);

  std::vector<Eigen::Triplet<double>> inner;
  std::vector<Eigen::Triplet<double>> outer;
  inner.reserve(M * (d == 1 ? 3 : 7));

  DiscreteOperator op;
  op.grid = grid;
  op.eps = eps_tag;
  op.max_c = -std::numeric_limits<double>::infinity();

  double worst_slack = 0.0;
  std::size_t worst_node = 0;
  for (std::size_t r = 0; r < M; ++r) {
    const std::size_t node = grid.interior_node(r);
    const CoefficientSample s = coeff(node);
    detail::Stencil st;
    const double slack = detail::add_diffusion(st, s.a, hx, hy, d);
    if (d == 2 && slack < worst_slack) {
      worst_slack = slack;
      worst_node = node;
    }

    for (int axis = 0; axis < d; ++axis) {
      const double b = s.b[axis];
      if (b == 0.0) continue;
      const double h = axis == 0 ? hx : hy;
      const int ex = axis == 0 ? 1 : 0;
      const int ey = axis == 1 ? 1 : 0;
      // Neighbour weight from the diffusion part along this axis.
      double w_axis = 0.0;
      for (int e = 0; e < st.size; ++e)
        if (st.entries[e].dx == ex && st.entries[e].dy == ey) w_axis = st.entries[e].w;
      bool centered = true;
      if (opts.drift == DriftScheme::upwind) {
        centered = false;
      } else if (opts.drift == DriftScheme::automatic) {
        // mesh Peclet number h |b| / (2 a) < 1, with a the effective neighbour weight * h^2
        centered = std::abs(b) / (2.0 * h) < w_axis;
      }
      if (centered) {
        st.add(ex, ey, b / (2.0 * h));
        st.add(-ex, -ey, -b / (2.0 * h));
      } else {
        ++op.upwind_nodes;
        if (b > 0.0) {
          st.add(ex, ey, b / h);
          st.add(0, 0, -b / h);
        } else {
          st.add(-ex, -ey, -b / h);
          st.add(0, 0, b / h);
        }
      }
    }
    st.add(0, 0, s.c);
    op.max_c = std::max(op.max_c, s.c);

    const int i = static_cast<int>(node % nx);
    const int j = d == 2 ? static_cast<int>(node / nx) : 0;
    for (int e = 0; e < st.size; ++e) {
      const auto& en = st.entries[e];
      if (en.w == 0.0 && !(en.dx == 0 && en.dy == 0)) continue;
      const std::size_t nb = grid.node(i + en.dx, j + en.dy);
      const long col = grid.interior_index(nb);
      if (col >= 0)
        inner.emplace_back(static_cast<int>(r), static_cast<int>(col), en.w);
      else
        outer.emplace_back(static_cast<int>(r), static_cast<int>(nb), en.w);
    }
  }
  if (worst_slack < -1e-14) {
    const Vec2 x = grid.point(worst_node);
    std::ostringstream os;
    os << "domain assembly: mixed-term dominance fails at node " << worst_node << " (x = " << x[0]
       << ", " << x[1] << "), deficit " << -worst_slack;
    throw AssemblyError(os.str());
  }
  if (M == 0) op.max_c = 0.0;

  op.matrix.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  op.matrix.setFromTriplets(inner.begin(), inner.end());
  op.matrix.makeCompressed();
  op.boundary.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(grid.node_count()));
  op.boundary.setFromTriplets(outer.begin(), outer.end());
  op.boundary.makeCompressed();

  std::ostringstream scheme;
  scheme << (d == 2 ? "seven-point" : "three-point") << "; drift "
         << (opts.drift == DriftScheme::automatic ? "auto"
             : opts.drift == DriftScheme::centered ? "centered"
                                                    : "upwind")
         << " (" << op.upwind_nodes << " upwind)";
  op.scheme = scheme.str();
  return op;
}

Vec2 fast_variable(const DomainGrid& grid, std::size_t node, double eps) {
  const double inv = 1.0 / eps;
  const double m = std::round(inv);
  const bool unit = grid.lower.isZero() && (grid.dim == 1 ? grid.upper[0] == 1.0 : grid.upper == Vec2::Ones());
  Vec2 y = Vec2::Zero();
  if (unit && m >= 1.0 && std::abs(inv - m) <= 1e-9 * m) {
    const auto mm = static_cast<long long>(m);
    const std::size_t nx = grid.nodes_per_axis(0);
    const long long idx[2] = {static_cast<long long>(node % nx),
                              static_cast<long long>(grid.dim == 2 ? node / nx : 0)};
    for (int k = 0; k < grid.dim; ++k) {
      const long long nk = grid.n[k];
      y[k] = static_cast<double>((idx[k] * mm) % nk) / static_cast<double>(nk);
    }
    return y;
  }
  const Vec2 x = grid.point(node);
  Vec2 raw = Vec2::Zero();
  for (int k = 0; k < grid.dim; ++k) raw[k] = x[k] * inv;
  return wrap_to_torus(raw, grid.dim);
}

DiscreteOperator assemble_oscillatory(const LinearOperatorSpec& spec, double eps,
                                      const DomainGrid& grid, const AssemblyOptions& opts) {
  check_spec(spec);
  if (!(eps > 0.0)) throw InputError("assemble_oscillatory: eps must be positive");
  if (spec.dim() != grid.dim) throw InputError("spec and domain grid dimensions differ");
  return assemble_operator(
      grid, [&](std::size_t node) { return spec.field(fast_variable(grid, node, eps)); }, eps, opts);
}

DiscreteOperator assemble_effective(const EffectiveLinear& eff, const DomainGrid& grid,
                                    const AssemblyOptions& opts) {
  if (eff.dim != grid.dim) throw InputError("effective operator and grid dimensions differ");
  CoefficientSample s;
  s.a = eff.a_bar;
  s.b = eff.b_bar;
  s.c = eff.c_bar;
  return assemble_operator(grid, [&](std::size_t) { return s; }, 0.0, opts);
}

// ---------------------------------------------------------------------------

BellmanOperator::BellmanOperator(const BellmanSpec& spec, double eps, const DomainGrid& grid,
                                 const AssemblyOptions& opts)
    : grid_(grid), eps_(eps) {
  check_spec(spec);
  if (spec.dim() != grid.dim) throw InputError("Bellman spec and domain grid dimensions differ");
  for (const auto& ctl : spec.controls) {
    if (eps > 0.0) {
      ops_.push_back(assemble_oscillatory(ctl, eps, grid, opts));
    } else {
      if (!ctl.field.constant)
        throw InputError("BellmanOperator: eps = 0 requires constant-coefficient controls");
      const CoefficientSample s = ctl.field(Vec2::Zero());
      ops_.push_back(assemble_operator(grid, [&](std::size_t) { return s; }, 0.0, opts));
    }
  }
}

Vector BellmanOperator::apply(const DomainFunction& full, Policy* policy_out) const {
  Vector best;
  Policy policy(grid_.interior_count(), 0);
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    const Vector v = ops_[k].apply(full);
    if (k == 0) {
      best = v;
      continue;
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] > best[i]) {
        best[i] = v[i];
        policy[static_cast<std::size_t>(i)] = static_cast<int>(k);
      }
    }
  }
  if (policy_out) *policy_out = std::move(policy);
  return best;
}

Policy BellmanOperator::improve(const DomainFunction& full, const Policy& current) const {
  std::vector<Vector> values;
  double scale = 0.0;
  for (const auto& op : ops_) {
    values.push_back(op.apply(full));
    scale = std::max(scale, values.back().cwiseAbs().maxCoeff());
  }
  const double tie = 1e-12 * scale;
  const std::size_t M = grid_.interior_count();
  Policy next(M, 0);
  for (std::size_t i = 0; i < M; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::size_t best = current.empty() ? 0 : static_cast<std::size_t>(current[i]);
    double best_val = values[best][ii];
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k][ii] > best_val + tie) {
        best = k;
        best_val = values[k][ii];
      }
    }
    next[i] = static_cast<int>(best);
  }
  return next;
}

DiscreteOperator BellmanOperator::frozen(const Policy& policy) const {
  const std::size_t M = grid_.interior_count();
  if (policy.size() != M) throw InputError("frozen policy does not match interior node count");
  std::vector<Eigen::Triplet<double>> inner;
  std::vector<Eigen::Triplet<double>> outer;
  DiscreteOperator op;
  op.grid = grid_;
  op.eps = eps_;
  op.scheme = "frozen policy";
  op.max_c = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < M; ++r) {
    const DiscreteOperator& src = ops_[static_cast<std::size_t>(policy[r])];
    const auto rr = static_cast<Eigen::Index>(r);
    double diag_c = 0.0;
    double row_sum = 0.0;
    for (SparseMatrix::InnerIterator it(src.matrix, rr); it; ++it) {
      inner.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
      row_sum += it.value();
    }
    for (SparseMatrix::InnerIterator it(src.boundary, rr); it; ++it) {
      outer.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
      row_sum += it.value();
    }
    diag_c = row_sum;  // rows of a : D^2 + b.D sum to zero, so the row sum is c
    op.max_c = std::max(op.max_c, diag_c);
  }
  if (M == 0) op.max_c = 0.0;
  op.matrix.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  op.matrix.setFromTriplets(inner.begin(), inner.end());
  op.matrix.makeCompressed();
  op.boundary.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(grid_.node_count()));
  op.boundary.setFromTriplets(outer.begin(), outer.end());
  op.boundary.makeCompressed();
  return op;
}

Vector apply_bellman(const BellmanSpec& spec, double eps, const DomainGrid& grid, const Vector& phi) {
  const BellmanOperator op(spec, eps, grid);
  if (phi.size() == static_cast<Eigen::Index>(grid.node_count())) return op.apply(phi);
  return op.apply(extend_by_zero(grid, phi));
}

// ---------------------------------------------------------------------------

MonotonicityReport is_monotone(const DiscreteOperator& op, double shift) {
  MonotonicityReport rep;
  const SparseMatrix& A = op.matrix;
  double worst_off = 0.0;
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      if (it.col() != r && it.value() < worst_off) {
        worst_off = it.value();
        rep.row = static_cast<long>(r);
        rep.col = static_cast<long>(it.col());
        rep.value = -it.value();
      }
    }
  }
  if (worst_off < 0.0) {
    rep.reason = "positive off-diagonal in shift*I - L";
    return rep;
  }

  bool any_strict = false;
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    double diag = 0.0;
    double off_sum = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      if (it.col() == r)
        diag = it.value();
      else
        off_sum += it.value();
    }
    const double b_diag = shift - diag;
    rep.row = static_cast<long>(r);
    if (!(b_diag > 0.0)) {
      rep.col = rep.row;
      rep.value = b_diag;
      rep.reason = "nonpositive diagonal of shift*I - L";
      return rep;
    }
    const double row = b_diag - off_sum;
    const double scale = b_diag + off_sum;
    if (row < -1e-12 * scale) {
      rep.col = -1;
      rep.value = row;
      rep.reason = "row not diagonally dominant";
      return rep;
    }
    if (row > 1e-12 * scale) any_strict = true;
  }
  rep.row = rep.col = -1;
  rep.value = 0.0;
  if (!any_strict && A.rows() > 0) {
    rep.reason = "no strictly dominant row";
    return rep;
  }
  rep.monotone = true;
  rep.reason = "ok";
  return rep;
}

}  // namespace ergodica
