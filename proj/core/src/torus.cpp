#include "ergodica/torus.hpp"

#include "ergodica/errors.hpp"
#include "periodic_interp.hpp"
#include "stencil.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ergodica {

PeriodicGrid::PeriodicGrid(int dim_, int n_) : dim(dim_), n(n_) {
  if (dim != 1 && dim != 2) throw InputError("periodic grid dimension must be 1 or 2");
  if (n < 4) throw InputError("periodic grid needs n >= 4");
}

std::size_t PeriodicGrid::index(int i, int j) const {
  const int ii = detail::wrap_index(i, n);
  if (dim == 1) return static_cast<std::size_t>(ii);
  return static_cast<std::size_t>(ii) + static_cast<std::size_t>(n) * detail::wrap_index(j, n);
}

Vec2 PeriodicGrid::point(std::size_t idx) const {
  Vec2 y = Vec2::Zero();
  y[0] = static_cast<double>(idx % n) / n;
  if (dim == 2) y[1] = static_cast<double>(idx / n) / n;
  return y;
}

std::vector<CoefficientSample> sample_field(const CoefficientField& field, const PeriodicGrid& grid) {
  if (field.dim != grid.dim) throw InputError("field and grid dimensions differ");
  std::vector<CoefficientSample> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = field(grid.point(k));
  return out;
}

SparseMatrix assemble_torus_diffusion(const std::vector<CoefficientSample>& samples,
                                      const PeriodicGrid& grid) {
  if (samples.size() != grid.size()) throw InputError("sample count does not match torus grid");
  const double h = grid.h();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(samples.size() * (grid.dim == 1 ? 3 : 7));

  double worst_slack = 0.0;
  std::size_t worst_node = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    detail::Stencil st;
    const double slack = detail::add_diffusion(st, samples[k].a, h, h, grid.dim);
    if (grid.dim == 2 && slack < worst_slack) {
      worst_slack = slack;
      worst_node = k;
    }
    const int i = static_cast<int>(k % grid.n);
    const int j = grid.dim == 2 ? static_cast<int>(k / grid.n) : 0;
    for (int e = 0; e < st.size; ++e) {
      const auto& en = st.entries[e];
      trip.emplace_back(static_cast<int>(k), static_cast<int>(grid.index(i + en.dx, j + en.dy)), en.w);
    }
  }
  if (worst_slack < -1e-14) {
    const Vec2 y = grid.point(worst_node);
    std::ostringstream os;
    os << "torus assembly: mixed-term dominance |a12| <= min(a11, a22) fails at node " << worst_node
       << " (y = " << y[0] << ", " << y[1] << "), deficit " << -worst_slack;
    throw AssemblyError(os.str());
  }
  SparseMatrix A(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

SparseMatrix assemble_torus_diffusion(const CoefficientField& field, const PeriodicGrid& grid) {
  return assemble_torus_diffusion(sample_field(field, grid), grid);
}

// ---------------------------------------------------------------------------

struct CellSolver::Impl {
  Eigen::SparseMatrix<double> bordered;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

CellSolver::CellSolver(const SparseMatrix& a_op, const PeriodicGrid& grid, double tol)
    : impl_(std::make_unique<Impl>()), a_op_(a_op), grid_(grid), tol_(tol) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  if (a_op.rows() != N || a_op.cols() != N) throw InputError("cell operator does not match grid");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a_op.nonZeros() + 2 * N);
  for (Eigen::Index r = 0; r < a_op.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a_op, r); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  }
  // Scale the border like the operator so the factorization stays balanced.
  const double scale = 1.0 / (grid.h() * grid.h());
  for (Eigen::Index k = 0; k < N; ++k) {
    trip.emplace_back(static_cast<int>(k), static_cast<int>(N), -1.0);
    trip.emplace_back(static_cast<int>(N), static_cast<int>(k), scale / static_cast<double>(N));
  }
  impl_->bordered.resize(N + 1, N + 1);
  impl_->bordered.setFromTriplets(trip.begin(), trip.end());
  impl_->bordered.makeCompressed();
  impl_->lu.analyzePattern(impl_->bordered);
  impl_->lu.factorize(impl_->bordered);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("cell problem: bordered system is singular (" + impl_->lu.lastErrorMessage() + ")");
}

CellSolver::~CellSolver() = default;
CellSolver::CellSolver(CellSolver&&) noexcept = default;
CellSolver& CellSolver::operator=(CellSolver&&) noexcept = default;

ErgodicSolution CellSolver::solve(const Vector& f, Normalization norm) const {
  const auto N = static_cast<Eigen::Index>(grid_.size());
  if (f.size() != N) throw InputError("cell right-hand side does not match grid");

  Vector rhs(N + 1);
  rhs.head(N) = -f;
  rhs[N] = 0.0;
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("cell problem: solve failed");

  const double op_norm = [&] {
    double m = 0.0;
    for (Eigen::Index r = 0; r < a_op_.outerSize(); ++r) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(a_op_, r); it; ++it) s += std::abs(it.value());
      m = std::max(m, s);
    }
    return m;
  }();

  auto relative_residual = [&](const Vector& sol, Vector& res) {
    res = rhs - impl_->bordered * sol;
    const double denom = std::max({f.cwiseAbs().maxCoeff(),
                                   op_norm * sol.head(N).cwiseAbs().maxCoeff(),
                                   std::abs(sol[N]), 1e-300});
    return res.cwiseAbs().maxCoeff() / denom;
  };

  Vector res;
  double rel = relative_residual(x, res);
  for (int it = 0; it < 4 && rel > tol_ * 1e-2; ++it) {
    x += impl_->lu.solve(res);
    rel = relative_residual(x, res);
  }
  if (!(rel <= tol_)) {
    std::ostringstream os;
    os << "cell problem: relative residual " << rel << " above tolerance " << tol_;
    throw IterationLimitError(os.str(), rel);
  }

  ErgodicSolution out;
  out.grid = grid_;
  out.chi = x.head(N);
  out.gamma = x[N];
  out.normalization = norm;
  out.residual = rel;
  if (norm == Normalization::anchor_at_y0) out.chi.array() -= out.chi[0];
  return out;
}

ErgodicSolution solve_cell(const SparseMatrix& a_op, const PeriodicGrid& grid, const Vector& f,
                           Normalization norm, double tol) {
  return CellSolver(a_op, grid, tol).solve(f, norm);
}

ErgodicSolution solve_cell_with_rhs(const SparseMatrix& a_op, const PeriodicGrid& grid,
                                    const Vector& rhs, Normalization norm, double tol) {
  return solve_cell(a_op, grid, rhs, norm, tol);
}

Vector torus_gradient(const PeriodicGrid& grid, const Vector& values, int axis) {
  if (values.size() != static_cast<Eigen::Index>(grid.size()))
    throw InputError("torus_gradient: size mismatch");
  if (axis < 0 || axis >= grid.dim) throw InputError("torus_gradient: axis out of range");
  const double inv = 1.0 / (12.0 * grid.h());
  Vector out(values.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int i = static_cast<int>(k % grid.n);
    const int j = grid.dim == 2 ? static_cast<int>(k / grid.n) : 0;
    auto at = [&](int off) {
      return axis == 0 ? values[static_cast<Eigen::Index>(grid.index(i + off, j))]
                       : values[static_cast<Eigen::Index>(grid.index(i, j + off))];
    };
    out[static_cast<Eigen::Index>(k)] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) * inv;
  }
  return out;
}

double torus_interpolate(const PeriodicGrid& grid, const Vector& values, const Vec2& y_raw) {
  const Vec2 y = wrap_to_torus(y_raw, grid.dim);
  return detail::periodic_cubic_eval(grid.dim, grid.n, y[0], y[1],
                                     [&](int idx) { return values[idx]; });
}

// ---------------------------------------------------------------------------

NonlinearCellSolver::NonlinearCellSolver(const BellmanSpec& spec, const PeriodicGrid& grid,
                                         double tol, int max_iter)
    : spec_(spec), grid_(grid), tol_(tol), max_iter_(max_iter) {
  check_spec(spec_);
  if (spec_.dim() != grid.dim) throw InputError("Bellman spec and torus grid dimensions differ");
  for (const auto& ctl : spec_.controls) {
    samples_.push_back(sample_field(ctl.field, grid_));
    ops_.push_back(assemble_torus_diffusion(samples_.back(), grid_));
  }
}

std::vector<CoefficientSample> NonlinearCellSolver::frozen_samples(const Policy& policy) const {
  std::vector<CoefficientSample> out(grid_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = samples_[policy[k]][k];
  return out;
}

SparseMatrix NonlinearCellSolver::frozen_operator(const Policy& policy) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const SparseMatrix& A = ops_[policy[k]];
    for (SparseMatrix::InnerIterator it(A, static_cast<Eigen::Index>(k)); it; ++it)
      trip.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), it.value());
  }
  SparseMatrix out(static_cast<Eigen::Index>(grid_.size()), static_cast<Eigen::Index>(grid_.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

Policy NonlinearCellSolver::improve(const Mat2& M, const Vector& w, const Policy& current,
                                    double* residual_out, double gamma) const {
  const std::size_t N = grid_.size();
  Policy next(current);
  double residual = 0.0;
  std::vector<Vector> applied;
  applied.reserve(ops_.size());
  for (const auto& A : ops_) applied.push_back(A * w);
  double scale = 1.0;
  for (const auto& v : applied) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  scale = std::max(scale, M.cwiseAbs().maxCoeff());
  const double tie = 1e-13 * scale;

  for (std::size_t k = 0; k < N; ++k) {
    auto value = [&](std::size_t beta) {
      return applied[beta][static_cast<Eigen::Index>(k)] +
             (samples_[beta][k].a.cwiseProduct(M)).sum();
    };
    std::size_t best = static_cast<std::size_t>(current[k]);
    double best_val = value(best);
    for (std::size_t beta = 0; beta < ops_.size(); ++beta) {
      const double v = value(beta);
      if (v > best_val + tie) {
        best = beta;
        best_val = v;
      }
    }
    next[k] = static_cast<int>(best);
    residual = std::max(residual, std::abs(best_val - gamma));
  }
  if (residual_out) *residual_out = residual;
  return next;
}

NonlinearCellSolution NonlinearCellSolver::solve(const Mat2& M_in, Policy policy) const {
  Mat2 M = M_in;
  if (grid_.dim == 1) {
    M(0, 1) = M(1, 0) = M(1, 1) = 0.0;
  } else {
    M(0, 1) = M(1, 0) = 0.5 * (M_in(0, 1) + M_in(1, 0));
  }
  const std::size_t N = grid_.size();
  if (policy.empty()) policy.assign(N, 0);
  if (policy.size() != N) throw InputError("initial policy does not match torus grid");

  std::set<Policy> seen;
  Policy previous;
  double previous_gamma = -std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter_; ++iter) {
    const std::vector<CoefficientSample> frozen = frozen_samples(policy);
    Vector f(static_cast<Eigen::Index>(N));
    for (std::size_t k = 0; k < N; ++k) f[static_cast<Eigen::Index>(k)] = (frozen[k].a.cwiseProduct(M)).sum();
    ErgodicSolution sol = solve_cell(frozen_operator(policy), grid_, f, Normalization::anchor_at_y0);

    double residual = 0.0;
    Policy next = improve(M, sol.chi, policy, &residual, sol.gamma);
    const double scale = std::max(1.0, std::abs(sol.gamma));
    if (next == policy) {
      if (residual > tol_ * scale) {
        std::ostringstream os;
        os << "nonlinear cell: stationary policy with residual " << residual;
        throw IterationLimitError(os.str(), residual);
      }
      return {std::move(sol), std::move(policy), iter, residual};
    }
    seen.insert(policy);
    if (seen.count(next) || sol.gamma < previous_gamma - 1e-12 * scale) {
      auto head = [](const Policy& p) {
        std::ostringstream os;
        for (std::size_t k = 0; k < std::min<std::size_t>(p.size(), 32); ++k) os << p[k];
        if (p.size() > 32) os << "...";
        return os.str();
      };
      throw PolicyCycleError("nonlinear cell: policy cycle without improvement; last policies " +
                             head(previous.empty() ? policy : previous) + " / " + head(next));
    }
    previous_gamma = sol.gamma;
    previous = policy;
    policy = std::move(next);
  }
  throw IterationLimitError("nonlinear cell: Howard iteration limit reached", previous_gamma);
}

NonlinearCellSolution solve_nonlinear_cell(const BellmanSpec& spec, const Mat2& M,
                                           const PeriodicGrid& grid, double tol) {
  return NonlinearCellSolver(spec, grid, tol).solve(M);
}

}  // namespace ergodica
