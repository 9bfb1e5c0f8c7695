#include "ergodica/corrector.hpp"
#include "ergodica/effective.hpp"
#include "ergodica/eigen.hpp"
#include "ergodica/problem.hpp"

#include <benchmark/benchmark.h>

using namespace ergodica;

static void BM_CellProblems(benchmark::State& state) {
  const Problem p = catalog_problem(state.range(1) == 2 ? "sep-2d" : "sin-abc");
  const PeriodicGrid g(static_cast<int>(state.range(1)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(effective_linear(p.linear, g).a_bar(0, 0));
}
BENCHMARK(BM_CellProblems)->Args({256, 1})->Args({4096, 1})->Args({32, 2})->Args({64, 2})
    ->Unit(benchmark::kMillisecond);

static void BM_PrincipalEigenpair1d(benchmark::State& state) {
  const Problem p = catalog_problem("sin-abc");
  const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / 16, DomainGrid(1, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(op).lambda);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrincipalEigenpair1d)->RangeMultiplier(2)->Range(256, 4096)->Unit(benchmark::kMillisecond);

static void BM_PrincipalEigenpair2d(benchmark::State& state) {
  const Problem p = catalog_problem("sep-2d");
  const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / 4, DomainGrid(2, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(op).lambda);
}
BENCHMARK(BM_PrincipalEigenpair2d)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_HowardEigen(benchmark::State& state) {
  const Problem p = catalog_problem("bellman-2ctl-1d");
  const DomainGrid g(1, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(principal_eigenpair_bellman(p.bellman, 1.0 / 16, g).pair.lambda);
}
BENCHMARK(BM_HowardEigen)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_LinearExpansion(benchmark::State& state) {
  const Problem p = catalog_problem("sin-abc");
  const PeriodicGrid torus(1, 64);
  const CorrectorSet cs = build_corrector_set(p.linear, torus);
  const EffectiveLinear eff = effective_linear(cs);
  const long m = state.range(0);
  const DomainGrid g(1, static_cast<int>(64 * m));
  const DiscreteOperator op = assemble_oscillatory(p.linear, 1.0 / m, g);
  const EigenPair u = principal_eigenpair(assemble_effective(eff, g));
  const DomainFunction full = extend_by_zero(g, u.phi);
  for (auto _ : state) benchmark::DoNotOptimize(linear_expansion(op, cs, eff, full).sup_norm_v);
}
BENCHMARK(BM_LinearExpansion)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
