#include <benchmark/benchmark.h>

#include "smoothgreed/smoothgreed.hpp"

using namespace smoothgreed;

namespace {

void BM_DesignCap(benchmark::State& state) {
  DesignSpec s;
  s.base = ScalarConcave::cap();
  s.horizon = 1.0;
  s.d = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(design_optimal(s).beta);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DesignCap)->RangeMultiplier(2)->Range(125, 2000)->Complexity();

void BM_DesignSequential(benchmark::State& state) {
  DesignSpec s;
  s.base = ScalarConcave::cap();
  s.horizon = 1.0;
  s.d = 1000;
  s.c = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(design_sequential(s).beta);
}
BENCHMARK(BM_DesignSequential);

void BM_TriangularRun(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const OnlineInstance inst = gen_adwords_triangular(n, 10);
  const auto obj = SeparableObjective::adwords(n, adwords_nesterov_smoothing());
  const Algorithm algo = state.range(1) ? Algorithm::simultaneous : Algorithm::sequential;
  for (auto _ : state) benchmark::DoNotOptimize(run(algo, obj, inst.steps).P);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(inst.steps.size()));
}
BENCHMARK(BM_TriangularRun)->ArgsProduct({{25, 100}, {0, 1}});

void BM_LpRun(benchmark::State& state) {
  const OnlineInstance inst = gen_lp_random(8, 200, 3, 0.5, 1);
  PenaltyLPObjective obj(8, inst.l, inst.theta);
  obj.use_nesterov_smoothing();
  for (auto _ : state) benchmark::DoNotOptimize(run_simultaneous(obj, inst.steps).P);
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_LpRun);

void BM_LogDetRun(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const OnlineInstance inst = gen_logdet_stream(n, 200, 0.5 * n, LogDetSource{}, 3);
  LogDetObjective obj(*inst.A0, inst.b, inst.l);
  obj.use_nesterov_smoothing();
  for (auto _ : state) benchmark::DoNotOptimize(run_simultaneous(obj, inst.steps).P);
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_LogDetRun)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
