#include "ergodica/catalog.hpp"
#include "ergodica/corrector.hpp"
#include "ergodica/errors.hpp"
#include "ergodica/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ergodica;
using std::numbers::pi;

namespace {

DomainFunction sample(const DomainGrid& g, double (*f)(const Vec2&)) {
  DomainFunction v(static_cast<Eigen::Index>(g.node_count()));
  for (std::size_t i = 0; i < g.node_count(); ++i) v[static_cast<Eigen::Index>(i)] = f(g.point(i));
  return v;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Corrector, FdWeightsClassicalStencils) {
  const auto w2 = fd_weights(0.0, {-1.0, 0.0, 1.0}, 2);
  EXPECT_NEAR(w2[0], 1.0, 1e-14);
  EXPECT_NEAR(w2[1], -2.0, 1e-14);
  EXPECT_NEAR(w2[2], 1.0, 1e-14);
  const auto w1 = fd_weights(0.0, {-2.0, -1.0, 0.0, 1.0, 2.0}, 1);
  EXPECT_NEAR(w1[0], 1.0 / 12, 1e-14);
  EXPECT_NEAR(w1[1], -8.0 / 12, 1e-14);
  EXPECT_NEAR(w1[3], 8.0 / 12, 1e-14);
  const auto w0 = fd_weights(0.5, {0.0, 1.0}, 0);
  EXPECT_NEAR(w0[0], 0.5, 1e-14);
}

TEST(Corrector, DerivativesOfSineAreFourthOrder) {
  const DomainGrid g(1, 128);
  const DomainFunction u = sample(g, [](const Vec2& x) { return std::sin(pi * x[0]); });
  const DerivativeBundle b = derivative_bundle(g, u, 3);
  double e1 = 0, e2 = 0, e3 = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double x = g.point(i)[0];
    e1 = std::max(e1, std::abs(b.dk(0)[i] - pi * std::cos(pi * x)));
    e2 = std::max(e2, std::abs(b.dkl(0, 0)[i] + pi * pi * std::sin(pi * x)));
    e3 = std::max(e3, std::abs(b.dklm(0, 0, 0)[i] + pi * pi * pi * std::cos(pi * x)));
  }
  EXPECT_LT(e1, 5e-7);
  EXPECT_LT(e2, 1e-5);
  EXPECT_LT(e3, 1e-3);
}

TEST(Corrector, MixedDerivativesIn2d) {
  const DomainGrid g(2, 48);
  const DomainFunction u = sample(g, [](const Vec2& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); });
  const DerivativeBundle b = derivative_bundle(g, u, 2);
  double err = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Vec2 x = g.point(i);
    err = std::max(err, std::abs(b.dkl(0, 1)[i] - pi * pi * std::cos(pi * x[0]) * std::cos(pi * x[1])));
    EXPECT_DOUBLE_EQ(b.dkl(0, 1)[i], b.dkl(1, 0)[i]);
  }
  EXPECT_LT(err, 1e-4);
}

TEST(Corrector, CoarseGridIsInputError) {
  const DomainGrid g(1, 3);
  EXPECT_THROW(derivative_bundle(g, DomainFunction::Zero(4), 3), InputError);
}

TEST(Corrector, SecondCorrectorIdentityConverges) {
  const Problem p = catalog_problem("sin-abc");
  const PeriodicGrid torus(1, 64);
  const CorrectorSet cs = build_corrector_set(p.linear, torus);
  const EffectiveLinear eff = effective_linear(cs);
  std::vector<double> res;
  for (int n : {128, 256}) {
    const DomainGrid g(1, n);
    const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
    const DerivativeBundle b = derivative_bundle(g, extend_by_zero(g, u.phi), 3);
    res.push_back(second_corrector_identity_residual(cs, b, u.lambda, 1));
  }
  EXPECT_LT(res[1], 1e-3 * eff.a_bar(0, 0) * 3.1416 * 3.1416);
  EXPECT_GT(res[0] / res[1], 3.0);
}

TEST(Corrector, ThirdCorrectorIdentityHolds) {
  const Problem p = catalog_problem("sin-abc");
  const PeriodicGrid torus(1, 64);
  const CorrectorSet cs = build_corrector_set(p.linear, torus);
  const EffectiveLinear eff = effective_linear(cs);
  const DomainGrid g(1, 256);
  const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
  const DerivativeBundle b = derivative_bundle(g, extend_by_zero(g, u.phi), 3);
  const DomainFunction psi1 = solve_psi1(eff, b);
  EXPECT_NEAR(psi1[0], 0.0, 1e-14);
  EXPECT_NEAR(psi1[256], 0.0, 1e-14);
  const DerivativeBundle pb = derivative_bundle(g, psi1, 2);
  const double res = third_corrector_identity_residual(cs, b, pb, 4);
  EXPECT_LT(res, 1e-4 * u.lambda);
}

TEST(Corrector, BoundaryCorrectorCancelsTrace) {
  const DomainGrid g(1, 16);
  const LinearOperatorSpec spec{make_constant_field(1, Mat2::Identity()), 1.0, 1.0};
  const DiscreteOperator op = assemble_oscillatory(spec, 0.5, g);
  const DomainFunction trace = DomainFunction::Ones(17);
  const DomainFunction z = boundary_corrector(op, trace);
  EXPECT_NEAR((z.array() + 1.0).abs().maxCoeff(), 0.0, 1e-12);
}

TEST(Corrector, FullCorrectorCombination) {
  const DomainFunction a = DomainFunction::Constant(5, 1.0);
  const DomainFunction b = DomainFunction::Constant(5, 2.0);
  const DomainFunction c = DomainFunction::Constant(5, 3.0);
  const double eps = 0.1;
  const ExpansionResult r = full_corrector(a, b, c, {}, {}, eps);
  EXPECT_NEAR(r.v_eps[2], eps * 1.0 + eps * eps * 5.0, 1e-15);
  EXPECT_NEAR(r.sup_norm_v, eps + 5 * eps * eps, 1e-15);
  const ExpansionResult r3 = full_corrector(a, b, c, a, b, eps);
  EXPECT_NEAR(r3.v_eps[0], eps + 5 * eps * eps + 3 * eps * eps * eps, 1e-15);
}

TEST(Corrector, ConstantCoefficientsGiveZeroCorrectors) {
  const Problem p = catalog_problem("constant");
  const PeriodicGrid torus(1, 32);
  const CorrectorSet cs = build_corrector_set(p.linear, torus);
  const EffectiveLinear eff = effective_linear(cs);
  const DomainGrid g(1, 128);
  const double eps = 0.125;
  const DiscreteOperator op = assemble_oscillatory(p.linear, eps, g);
  const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
  const DomainFunction full = extend_by_zero(g, u.phi);
  const ExpansionResult r = linear_expansion(op, cs, eff, full);
  EXPECT_LE(max_abs(r.w2_trace), 1e-12);
  EXPECT_LE(max_abs(r.psi1), 1e-12);
  EXPECT_LE(max_abs(r.z2), 1e-12);
  EXPECT_LE(r.sup_norm_v, 1e-12);
  const Vector w = pivot_problem(op, u.phi, u.lambda);
  EXPECT_LE(max_abs(w - u.phi), 1e-10);
}

TEST(Corrector, AlignmentIsOrthogonal) {
  const Problem p = catalog_problem("sin-a");
  const DomainGrid g(1, 512);
  const EffectiveLinear eff = effective_linear(p.linear, PeriodicGrid(1, 64));
  const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
  const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / 8, g);
  const EigenPair ue = principal_eigenpair(op);
  const Vector w = pivot_problem(op, u.phi, u.lambda);
  const Alignment al = align_eigenfunctions(w, ue, g);
  EXPECT_NEAR(l2_inner(al.z, ue.phi, g), 0.0, 1e-14);
  EXPECT_NEAR(max_abs(al.z - (ue.phi - w + al.t_eps * ue.phi)), 0.0, 1e-14);
  EXPECT_LT(std::abs(al.t_eps), 0.1);
}

TEST(Corrector, ExpansionResidualIsSecondOrder) {
  const Problem p = catalog_problem("sin-a");
  const PeriodicGrid torus(1, 64);
  const CorrectorSet cs = build_corrector_set(p.linear, torus);
  const EffectiveLinear eff = effective_linear(cs);
  std::vector<double> res;
  for (int m : {8, 16}) {
    const DomainGrid g(1, 64 * m);
    const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / m, g);
    const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
    const DomainFunction full = extend_by_zero(g, u.phi);
    const ExpansionResult r = linear_expansion(op, cs, eff, full);
    res.push_back(expansion_residual(op, full, r.v_eps, u.lambda));
  }
  EXPECT_GT(res[0] / res[1], 3.0);
}

TEST(Corrector, NonlinearExpansionSmallResidual) {
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const PeriodicGrid torus(1, 64);
  const BellmanSpec planes = effective_bellman(p.bellman, torus);
  std::vector<double> res;
  for (int m : {8, 16}) {
    const DomainGrid g(1, 64 * m);
    const BellmanEigenResult ub = principal_eigenpair_bellman(planes, 0.0, g);
    const DomainFunction full = extend_by_zero(g, ub.pair.phi);
    const NonlinearExpansion ne = nonlinear_expansion(p.bellman, full, ub.pair.lambda, 1.0 / m, g, torus);
    EXPECT_GT(ne.cache_hits, 0u);
    EXPECT_LT(ne.w2F_residual, 1e-8);
    res.push_back(ne.residual);
  }
  EXPECT_GT(res[0] / res[1], 1.5);
}
