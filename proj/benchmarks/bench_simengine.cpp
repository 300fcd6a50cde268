#include <benchmark/benchmark.h>

#include "cacsim/simengine.hpp"

using namespace cacsim;

namespace {

void BM_SimulationRun(benchmark::State& state) {
  SystemConfig sys;
  sys.total_channels = 30;
  sys.classes = canonical_classes(0.9, 1.0);
  sys.thresholds = {20, 24, 27};
  ThresholdPolicy policy(sys.thresholds);
  const double horizon = static_cast<double>(state.range(0)) / 2.7;  // ~range events
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(sys, policy, 0.1 * horizon, horizon, seed++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulationRun)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
