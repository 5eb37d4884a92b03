#include <benchmark/benchmark.h>

#include <vrnbw/equilibria.hpp>
#include <vrnbw/flow.hpp>
#include <vrnbw/kernels.hpp>
#include <vrnbw/walk.hpp>

using namespace vrnbw;

namespace {

ProbabilityMeasure spread(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * i;
  return ProbabilityMeasure::normalized(v);
}

void BM_WalkSteps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  WalkState s = init_walk(GraphTopology::complete(n), 2.0, 1);
  for (auto _ : state) step(s);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WalkSteps)->Arg(4)->Arg(8)->Arg(32);

void BM_StationaryClosedForm(benchmark::State& state) {
  const ProbabilityMeasure v = spread(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_closed_form(v, 2.0));
}
BENCHMARK(BM_StationaryClosedForm)->Arg(4)->Arg(8)->Arg(16);

void BM_StationarySolve(benchmark::State& state) {
  const EdgeKernel K = build_vrnbw_kernel(spread(static_cast<int>(state.range(0))), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(stationary_solve(K));
}
BENCHMARK(BM_StationarySolve)->Arg(4)->Arg(8)->Arg(16);

void BM_PseudoInverse(benchmark::State& state) {
  const ProbabilityMeasure v = spread(static_cast<int>(state.range(0)));
  const EdgeKernel K = build_vrnbw_kernel(v, 2.0);
  const StationaryPair sp = stationary_closed_form(v, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(pseudo_inverse(K, sp.edge));
}
BENCHMARK(BM_PseudoInverse)->Arg(4)->Arg(8);

void BM_ProjectToSigma(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Vector v = Vector::Zero(n);
  v[0] = 0.8;
  v[1] = 0.3;
  v[n - 1] = -0.1;
  const SignedMeasure m(v);
  for (auto _ : state) benchmark::DoNotOptimize(project_to_sigma(m));
}
BENCHMARK(BM_ProjectToSigma)->Arg(4)->Arg(16)->Arg(64);

void BM_VectorField(benchmark::State& state) {
  const ProbabilityMeasure v = spread(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vector_field(SignedMeasure(v), 2.0));
}
BENCHMARK(BM_VectorField)->Arg(8)->Arg(32);

void BM_EnumerateEquilibria(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_equilibria(static_cast<int>(state.range(0)), 2.0));
}
BENCHMARK(BM_EnumerateEquilibria)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
