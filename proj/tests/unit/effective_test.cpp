#include "ergodica/catalog.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/problem.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ergodica;
using std::numbers::pi;

TEST(Effective, HarmonicMeanOf1dDiffusion) {
  const Problem p = catalog_problem("sin-a");
  const EffectiveLinear eff = effective_linear(p.linear, PeriodicGrid(1, 512));
  const double quad = oracle::harmonic_mean([](double y) { return 1.0 + 0.5 * std::sin(2 * pi * y); });
  EXPECT_NEAR(quad, std::sqrt(3.0) / 2.0, 1e-10);
  EXPECT_NEAR(eff.a_bar(0, 0), quad, 1e-6);
  EXPECT_NEAR(eff.b_bar[0], 0.0, 1e-14);
  EXPECT_NEAR(eff.c_bar, 0.0, 1e-14);
}

TEST(Effective, HarmonicMeanAcrossDeltas) {
  for (double delta : {0.1, 0.3, 0.7, 0.9}) {
    const LinearOperatorSpec spec{make_one_plus_delta_sin(delta), 1 - delta, 1 + delta};
    const EffectiveLinear eff = effective_linear(spec, PeriodicGrid(1, 256));
    EXPECT_NEAR(eff.a_bar(0, 0), std::sqrt(1 - delta * delta), 1e-8) << delta;
  }
}

TEST(Effective, DriftAndPotentialAveragedAgainstInvariantMeasure) {
  const Problem p = catalog_problem("sin-abc");
  const EffectiveLinear eff = effective_linear(p.linear, PeriodicGrid(1, 512));
  // Invariant density m = (1/a) / int(1/a) for a(y) chi'' + f = gamma.
  auto a = [](double y) { return 1.0 + 0.5 * std::sin(2 * pi * y); };
  const double z = oracle::integrate([&](double y) { return 1.0 / a(y); }, 0, 1);
  auto avg = [&](auto f) { return oracle::integrate([&](double y) { return f(y) / a(y); }, 0, 1) / z; };
  EXPECT_NEAR(eff.a_bar(0, 0), 1.0 / z, 1e-8);
  EXPECT_NEAR(eff.b_bar[0], avg([](double y) { return 0.5 + std::cos(2 * pi * y); }), 1e-8);
  EXPECT_NEAR(eff.c_bar,
              avg([](double y) { return 0.5 * std::sin(2 * pi * y) + 0.3 * std::cos(4 * pi * y); }),
              1e-8);
}

TEST(Effective, ConstantCoefficientsAreTheirOwnAverage) {
  Mat2 a;
  a << 2.0, 0.3, 0.3, 1.0;
  const CoefficientField f = make_constant_field(2, a, Vec2(0.5, -0.25), 0.75);
  const LinearOperatorSpec spec{f, 0.5, 3.0, 1.0};
  const PeriodicGrid g(2, 8);
  const CorrectorSet cs = build_corrector_set(spec, g);
  const EffectiveLinear eff = effective_linear(spec, cs, g);
  EXPECT_NEAR((eff.a_bar - a).norm(), 0.0, 1e-12);
  EXPECT_NEAR((eff.b_bar - Vec2(0.5, -0.25)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(eff.c_bar, 0.75, 1e-12);
  for (const auto& s : cs.chi_kl) EXPECT_LE(s.chi.cwiseAbs().maxCoeff(), 1e-12);
  for (const auto& s : cs.eta_k) EXPECT_LE(s.chi.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(cs.nu.chi.cwiseAbs().maxCoeff(), 1e-12);
  for (double v : eff.a_bar_klm) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Effective, SeparableTwoDimensionalField) {
  const Problem p = catalog_problem("sep-2d");
  const EffectiveLinear eff = effective_linear(p.linear, PeriodicGrid(2, 64));
  EXPECT_NEAR(eff.a_bar(0, 0), std::sqrt(3.0) / 2.0, 1e-8);
  EXPECT_NEAR(eff.a_bar(1, 1), std::sqrt(3.0) / 2.0, 1e-8);
  EXPECT_NEAR(eff.a_bar(0, 1), 0.0, 1e-12);
  EXPECT_LE(eff.asymmetry_defect, 1e-10);
}

TEST(Effective, NonlinearConstantIsHomogeneousAndConvex) {
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const NonlinearCellSolver solver(p.bellman, PeriodicGrid(1, 64));
  Mat2 M = Mat2::Zero();
  M(0, 0) = 1.0;
  const double f1 = effective_nonlinear(solver, M);
  EXPECT_NEAR(effective_nonlinear(solver, 3.0 * M), 3.0 * f1, 1e-10);
  const double fm = effective_nonlinear(solver, -M);
  EXPECT_GE(f1 + fm, -1e-12);  // convexity at 0: F(M) + F(-M) >= 2 F(0) = 0
}

TEST(Effective, BellmanPlanesReproduceFbarIn1d) {
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const PeriodicGrid g(1, 64);
  const BellmanSpec planes = effective_bellman(p.bellman, g);
  for (double m : {1.0, -1.0, 0.3, -2.0}) {
    Mat2 M = Mat2::Zero();
    M(0, 0) = m;
    EXPECT_NEAR(eval_bellman(planes, Vec2::Zero(), 0.0, Vec2::Zero(), M),
                effective_nonlinear(p.bellman, M, g), 1e-9);
  }
}

TEST(Effective, LinearizationOfSingleControlIsHarmonicMean) {
  const Problem p = catalog_problem("sin-a");
  Mat2 M = Mat2::Zero();
  M(0, 0) = 0.8;
  const Mat2 D = linearize_effective(BellmanSpec{{p.linear}}, M, PeriodicGrid(1, 128));
  EXPECT_NEAR(D(0, 0), effective_linear(p.linear, PeriodicGrid(1, 128)).a_bar(0, 0), 1e-8);
}
