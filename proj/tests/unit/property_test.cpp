#include "ergodica/catalog.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/eigen.hpp"
#include "ergodica/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ergodica;
using std::numbers::pi;

namespace {

SinAbcParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SinAbcParams p;
  p.delta = 0.8 * std::abs(u(rng));
  p.b0 = 2.0 * u(rng);
  p.b1 = 2.0 * u(rng);
  p.c1 = 2.0 * u(rng);
  p.c2 = u(rng);
  return p;
}

}  // namespace

class RandomSinAbc : public ::testing::TestWithParam<int> {};

TEST_P(RandomSinAbc, DiscreteOperatorIsMonotone) {
  std::mt19937_64 rng(100 + GetParam());
  const SinAbcParams sp = random_params(rng);
  const LinearOperatorSpec spec{make_sin_abc(sp), 1 - sp.delta, 1 + sp.delta, 5.0};
  for (int n : {8, 64, 256}) {
    const DiscreteOperator op = assemble_oscillatory(spec, 0.25, DomainGrid(1, n));
    EXPECT_TRUE(is_monotone(op, op.properness_shift()).monotone) << n;
  }
}

TEST_P(RandomSinAbc, EigenpairIsPositiveAndBracketed) {
  std::mt19937_64 rng(200 + GetParam());
  const SinAbcParams sp = random_params(rng);
  const LinearOperatorSpec spec{make_sin_abc(sp), 1 - sp.delta, 1 + sp.delta, 5.0};
  const EigenPair p = principal_eigenpair(assemble_oscillatory(spec, 0.125, DomainGrid(1, 256)));
  EXPECT_GT(p.phi.minCoeff(), 0.0);
  EXPECT_LE(p.cw_lower, p.lambda);
  EXPECT_GE(p.cw_upper, p.lambda);
  EXPECT_LE(p.bracket_width(), 1e-10);
  EXPECT_LT(p.residual, 1e-6);
}

TEST_P(RandomSinAbc, EffectiveDiffusionBetweenBounds) {
  std::mt19937_64 rng(300 + GetParam());
  const SinAbcParams sp = random_params(rng);
  const LinearOperatorSpec spec{make_sin_abc(sp), 1 - sp.delta, 1 + sp.delta, 5.0};
  const EffectiveLinear eff = effective_linear(spec, PeriodicGrid(1, 128));
  // harmonic <= arithmetic mean
  EXPECT_LE(eff.a_bar(0, 0), 1.0 + 1e-12);
  EXPECT_NEAR(eff.a_bar(0, 0), std::sqrt(1 - sp.delta * sp.delta), 1e-8);
  EXPECT_LE(std::abs(eff.c_bar), std::abs(sp.c1) + std::abs(sp.c2) + 1e-12);
}

TEST_P(RandomSinAbc, EigenvalueMonotoneInPotential) {
  std::mt19937_64 rng(400 + GetParam());
  SinAbcParams sp = random_params(rng);
  const DomainGrid g(1, 128);
  const LinearOperatorSpec a{make_sin_abc(sp), 1 - sp.delta, 1 + sp.delta, 5.0};
  CoefficientField shifted = make_sin_abc(sp);
  auto base = shifted.eval;
  shifted.eval = [base](const Vec2& y) {
    CoefficientSample s = base(y);
    s.c += 0.5;
    return s;
  };
  const LinearOperatorSpec b{shifted, 1 - sp.delta, 1 + sp.delta, 5.5};
  const double la = principal_eigenpair(assemble_oscillatory(a, 0.25, g)).lambda;
  const double lb = principal_eigenpair(assemble_oscillatory(b, 0.25, g)).lambda;
  EXPECT_NEAR(la - lb, 0.5, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomSinAbc, ::testing::Range(0, 8));

class RandomCellMatrix : public ::testing::TestWithParam<int> {};

TEST_P(RandomCellMatrix, NonlinearConstantIsMonotoneAndHomogeneous) {
  std::mt19937_64 rng(500 + GetParam());
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const NonlinearCellSolver solver(p.bellman, PeriodicGrid(1, 32));
  Mat2 M = Mat2::Zero();
  M(0, 0) = u(rng);
  const double t = 1.0 + std::abs(u(rng));
  const double f = effective_nonlinear(solver, M);
  EXPECT_NEAR(effective_nonlinear(solver, t * M), t * f, 1e-9 * (1 + std::abs(f)));
  Mat2 N = M;
  N(0, 0) += std::abs(u(rng));
  EXPECT_GE(effective_nonlinear(solver, N), f - 1e-12);
}

TEST_P(RandomCellMatrix, HowardPolicyIsOptimalNodewise) {
  std::mt19937_64 rng(600 + GetParam());
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Problem p = catalog_problem("bellman-2ctl-1d");
  Mat2 M = Mat2::Zero();
  M(0, 0) = u(rng);
  const NonlinearCellSolution s = solve_nonlinear_cell(p.bellman, M, PeriodicGrid(1, 32));
  EXPECT_LT(s.residual, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCellMatrix, ::testing::Range(0, 6));

TEST(Properties, EffectiveEigenvalueScalesWithDiffusion) {
  for (double a : {0.5, 1.0, 2.0}) {
    const EffectiveLinear eff = constant_effective(1, Mat2::Identity() * a, Vec2::Zero(), 0.0);
    const EigenPair p = principal_eigenpair(assemble_effective(eff, DomainGrid(1, 128)));
    const double h = 1.0 / 128;
    EXPECT_NEAR(p.lambda, a * 4 / (h * h) * std::pow(std::sin(pi * h / 2), 2), 1e-9);
  }
}
