#include "ergodica/catalog.hpp"
#include "ergodica/errors.hpp"
#include "ergodica/problem.hpp"
#include "ergodica/torus.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ergodica;
using std::numbers::pi;

namespace {

Vector node_values(const PeriodicGrid& g, double (*f)(const Vec2&)) {
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(g.point(i));
  return v;
}

}  // namespace

TEST(Torus, GridRejectsTinyOrBadDimension) {
  EXPECT_THROW(PeriodicGrid(3, 8), InputError);
  EXPECT_THROW(PeriodicGrid(1, 2), InputError);
}

TEST(Torus, DiffusionRowsSumToZeroWithNonnegativeOffDiagonals) {
  CoefficientField f;
  f.dim = 2;
  f.eval = [](const Vec2& y) {
    CoefficientSample s;
    s.a << 2.0 + std::sin(2 * pi * y[0]), 0.3 * std::cos(2 * pi * y[1]),
        0.3 * std::cos(2 * pi * y[1]), 1.5;
    return s;
  };
  const PeriodicGrid g(2, 12);
  const SparseMatrix A = assemble_torus_diffusion(f, g);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      sum += it.value();
      if (it.col() != r) EXPECT_GE(it.value(), 0.0);
    }
    EXPECT_NEAR(sum, 0.0, 1e-9);
  }
}

TEST(Torus, MixedDominanceViolationThrows) {
  const PeriodicGrid g(2, 8);
  Mat2 a;
  a << 1.0, 1.2, 1.2, 2.0;
  EXPECT_THROW(assemble_torus_diffusion(make_constant_field(2, a), g), AssemblyError);
}

TEST(Torus, SineCorrectorAmplitude) {
  const PeriodicGrid g(1, 256);
  const SparseMatrix A = assemble_torus_diffusion(make_constant_field(1, Mat2::Identity()), g);
  const Vector f = node_values(g, [](const Vec2& y) { return std::sin(2 * pi * y[0]); });
  const ErgodicSolution s = solve_cell(A, g, f);
  EXPECT_NEAR(s.gamma, 0.0, 1e-12);
  const double amp = s.chi.cwiseAbs().maxCoeff();
  EXPECT_NEAR(amp, 1.0 / (4 * pi * pi), 1e-4 / (4 * pi * pi));
  EXPECT_NEAR(s.chi[0], 0.0, 1e-14);
  EXPECT_LT(s.residual, 1e-10);
}

TEST(Torus, MeanZeroNormalization) {
  const PeriodicGrid g(1, 64);
  const SparseMatrix A = assemble_torus_diffusion(make_one_plus_delta_sin(0.5), g);
  const Vector f = node_values(g, [](const Vec2& y) { return std::cos(2 * pi * y[0]) + 0.3; });
  const ErgodicSolution a = solve_cell(A, g, f, Normalization::mean_zero);
  const ErgodicSolution b = solve_cell(A, g, f, Normalization::anchor_at_y0);
  EXPECT_NEAR(a.chi.mean(), 0.0, 1e-13);
  EXPECT_NEAR(b.chi[0], 0.0, 1e-14);
  EXPECT_NEAR(a.gamma, b.gamma, 1e-12);
  const Vector diff = a.chi - b.chi;
  EXPECT_NEAR(diff.maxCoeff() - diff.minCoeff(), 0.0, 1e-12);
}

TEST(Torus, ErgodicConstantOfDiffusionForcingIsHarmonicMean) {
  const PeriodicGrid g(1, 128);
  const CoefficientField field = make_one_plus_delta_sin(0.5);
  const SparseMatrix A = assemble_torus_diffusion(field, g);
  Vector f(128);
  double inv = 0.0;
  for (int i = 0; i < 128; ++i) {
    f[i] = field(Vec2(i / 128.0, 0)).a(0, 0);
    inv += 1.0 / f[i];
  }
  EXPECT_NEAR(solve_cell(A, g, f).gamma, 128.0 / inv, 1e-12);
}

TEST(Torus, CellSolverRejectsSizeMismatch) {
  const PeriodicGrid g(1, 16);
  const CellSolver solver(assemble_torus_diffusion(make_one_plus_delta_sin(0.5), g), g);
  EXPECT_THROW(solver.solve(Vector::Zero(8)), InputError);
}

TEST(Torus, GradientIsFourthOrder) {
  double prev = 0.0;
  for (int n : {16, 32}) {
    const PeriodicGrid g(1, n);
    const Vector v = node_values(g, [](const Vec2& y) { return std::sin(2 * pi * y[0]); });
    const Vector d = torus_gradient(g, v, 0);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] - 2 * pi * std::cos(2 * pi * i / double(n))));
    if (prev > 0) EXPECT_GT(prev / err, 12.0);
    prev = err;
  }
}

TEST(Torus, InterpolationReproducesNodesAndSmoothValues) {
  const PeriodicGrid g(2, 32);
  const Vector v = node_values(g, [](const Vec2& y) {
    return std::sin(2 * pi * y[0]) * std::cos(2 * pi * y[1]);
  });
  EXPECT_NEAR(torus_interpolate(g, v, g.point(37)), v[37], 1e-14);
  const Vec2 y(0.313, 0.771);
  EXPECT_NEAR(torus_interpolate(g, v, y), std::sin(2 * pi * y[0]) * std::cos(2 * pi * y[1]), 2e-4);
  EXPECT_NEAR(torus_interpolate(g, v, y + Vec2(1, -2)), torus_interpolate(g, v, y), 1e-14);
}

TEST(Torus, NonlinearCellMatchesPolicyEnumeration) {
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const std::vector<oracle::Fn1> controls{
      [](double y) { return 1.0 + 0.5 * std::sin(2 * pi * y); }, [](double) { return 1.2; }};
  const PeriodicGrid g(1, 8);
  for (double m : {1.0, -1.0, 2.5, -0.4}) {
    Mat2 M = Mat2::Zero();
    M(0, 0) = m;
    const NonlinearCellSolution s = solve_nonlinear_cell(p.bellman, M, g);
    EXPECT_NEAR(s.solution.gamma, oracle::enumerate_cell_constant_1d(controls, 8, m), 1e-9) << m;
    EXPECT_LT(s.residual, 1e-9);
  }
}

TEST(Torus, NonlinearCellSingleControlIsLinear) {
  const Problem lin = catalog_problem("sin-a");
  const BellmanSpec single{{lin.linear}};
  const PeriodicGrid g(1, 64);
  Mat2 M = Mat2::Zero();
  M(0, 0) = 1.7;
  const NonlinearCellSolution s = solve_nonlinear_cell(single, M, g);
  double inv = 0.0;
  for (int i = 0; i < 64; ++i) inv += 1.0 / (1.0 + 0.5 * std::sin(2 * pi * i / 64.0));
  EXPECT_NEAR(s.solution.gamma, 1.7 * 64.0 / inv, 1e-11);
  EXPECT_LE(s.iterations, 2);
}
