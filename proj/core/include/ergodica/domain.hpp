#pragma once

#include "ergodica/coeff.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/torus.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace ergodica {

/// Tensor grid on an interval or rectangle. Node (i, j), 0 <= i <= n[0],
/// 0 <= j <= n[1], sits at lower + (i, j) h; nodes with i or j on the edge
/// form the boundary ring.
struct DomainGrid {
  int dim = 1;
  Vec2 lower = Vec2::Zero();
  Vec2 upper = Vec2::Ones();
  std::array<int, 2> n{1, 1};  // intervals per axis

  DomainGrid() = default;
  /// Unit interval / unit square with n intervals per axis.
  DomainGrid(int dim, int n);
  DomainGrid(int dim, const Vec2& lower, const Vec2& upper, std::array<int, 2> n);

  double h(int axis) const { return (upper[axis] - lower[axis]) / n[axis]; }
  std::size_t nodes_per_axis(int axis) const { return static_cast<std::size_t>(n[axis]) + 1; }
  std::size_t node_count() const;
  std::size_t interior_count() const;
  std::size_t node(int i, int j = 0) const { return static_cast<std::size_t>(i) + nodes_per_axis(0) * j; }
  Vec2 point(std::size_t node) const;
  bool on_boundary(std::size_t node) const;

  /// Interior index of a node, or -1 on the boundary.
  long interior_index(std::size_t node) const;
  /// Node of an interior index.
  std::size_t interior_node(std::size_t interior) const;

  /// Cell volume prod h_k used for discrete L2 products.
  double cell_volume() const;
};

/// Node-indexed values on a DomainGrid (node_count entries, boundary included).
using DomainFunction = Vector;

Vector restrict_to_interior(const DomainGrid& grid, const DomainFunction& full);
DomainFunction extend_by_zero(const DomainGrid& grid, const Vector& interior);

enum class DriftScheme { automatic, centered, upwind };

struct AssemblyOptions {
  DriftScheme drift = DriftScheme::automatic;
};

/// Discrete operator on the interior nodes. `matrix` couples interior nodes;
/// `boundary` couples interior rows to boundary nodes (columns are node
/// indices) so non-zero Dirichlet data can be applied.
struct DiscreteOperator {
  SparseMatrix matrix;
  SparseMatrix boundary;  // interior x node_count, only boundary columns populated
  DomainGrid grid;
  double eps = 0.0;       // 0 tags an effective (non-oscillatory) operator
  std::string scheme;
  double max_c = 0.0;     // max zeroth-order coefficient over interior nodes
  std::size_t upwind_nodes = 0;

  /// L_h phi at interior nodes for a full node vector (boundary values used).
  Vector apply(const DomainFunction& full) const;
  /// Properness shift s = max(0, max c) + 1.
  double properness_shift() const;
};

/// Coefficients at a node (full node index).
using NodeCoefficients = std::function<CoefficientSample(std::size_t node)>;

/// Generic assembly: centred second differences (seven-point monotone mixed
/// stencil), centred or upwind drift per node, c on the diagonal.
DiscreteOperator assemble_operator(const DomainGrid& grid, const NodeCoefficients& coeff,
                                   double eps_tag, const AssemblyOptions& opts = {});

/// Fast variable y = frac(x / eps) at a node. For eps = 1/m with m integral
/// the value is computed from integer node indices.
Vec2 fast_variable(const DomainGrid& grid, std::size_t node, double eps);

DiscreteOperator assemble_oscillatory(const LinearOperatorSpec& spec, double eps,
                                      const DomainGrid& grid, const AssemblyOptions& opts = {});

DiscreteOperator assemble_effective(const EffectiveLinear& eff, const DomainGrid& grid,
                                    const AssemblyOptions& opts = {});

/// Per-control operators of x -> max_beta L_beta(x/eps) for a Bellman spec.
class BellmanOperator {
public:
  BellmanOperator(const BellmanSpec& spec, double eps, const DomainGrid& grid,
                  const AssemblyOptions& opts = {});

  /// Nodewise max over controls; `policy_out` receives the argmax.
  Vector apply(const DomainFunction& full, Policy* policy_out = nullptr) const;
  /// Argmax policy against phi; ties keep `current` (if given).
  Policy improve(const DomainFunction& full, const Policy& current) const;
  DiscreteOperator frozen(const Policy& policy) const;

  std::size_t controls() const { return ops_.size(); }
  const DiscreteOperator& control(std::size_t k) const { return ops_[k]; }
  const DomainGrid& grid() const { return grid_; }
  double eps() const { return eps_; }

private:
  DomainGrid grid_;
  double eps_;
  std::vector<DiscreteOperator> ops_;
};

/// Discrete F(x/eps, D^2 phi) for phi given on the interior (zero boundary).
Vector apply_bellman(const BellmanSpec& spec, double eps, const DomainGrid& grid, const Vector& phi);

struct MonotonicityReport {
  bool monotone = false;
  long row = -1;
  long col = -1;
  double value = 0.0;   // offending entry of shift I - matrix (or row sum)
  std::string reason;
};

/// True iff shift I - matrix has a positive diagonal, nonpositive
/// off-diagonals and is irreducibly diagonally dominant.
MonotonicityReport is_monotone(const DiscreteOperator& op, double shift);

}  // namespace ergodica
