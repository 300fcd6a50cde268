#include <benchmark/benchmark.h>

#include "cacsim/markov.hpp"

using namespace cacsim;

namespace {

SystemConfig canonical_system(int n) {
  SystemConfig sys;
  sys.total_channels = n;
  sys.classes = canonical_classes(0.9, 1.0);
  sys.thresholds = {2 * n / 3, 4 * n / 5, 9 * n / 10};
  return sys;
}

void BM_SolveRecurrence(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_recurrence(UtilizationRate{0.9}, n));
  }
}
BENCHMARK(BM_SolveRecurrence)->Arg(30)->Arg(100)->Arg(1000);

void BM_ErlangB(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(erlang_b(n, UtilizationRate{0.8 * n}));
  }
}
BENCHMARK(BM_ErlangB)->Arg(30)->Arg(300);

void BM_BuildCtmc(benchmark::State& state) {
  const SystemConfig sys = canonical_system(static_cast<int>(state.range(0)));
  AdmitIfFitsPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_ctmc(sys, policy));
  }
}
BENCHMARK(BM_BuildCtmc)->Arg(12)->Arg(30);

void BM_SteadyState(benchmark::State& state) {
  const SystemConfig sys = canonical_system(static_cast<int>(state.range(0)));
  AdmitIfFitsPolicy policy;
  const CtmcModel model = build_ctmc(sys, policy);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctmc_steady_state(model));
  }
  state.counters["states"] = static_cast<double>(model.state_count());
}
BENCHMARK(BM_SteadyState)->Arg(12)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
