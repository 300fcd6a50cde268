#include <benchmark/benchmark.h>

#include "cacsim/rrbfn.hpp"

using namespace cacsim;

namespace {

TrainingSet make_batch(const RrbfnParams& params, int count) {
  RandomStream rng(7);
  TrainingSet set;
  for (int s = 0; s < count; ++s) {
    TrainingSample sample;
    sample.features.resize(static_cast<std::size_t>(params.input_width));
    for (double& f : sample.features) f = rng.uniform01();
    sample.label = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    set.samples.push_back(std::move(sample));
  }
  return set;
}

void BM_Forward(benchmark::State& state) {
  RandomStream rng(3);
  const RrbfnParams params =
      random_params(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), rng);
  const TrainingSet batch = make_batch(params, 1);
  const auto& features = batch.samples.front().features;
  RrbfnState memory = zero_state(params);
  for (auto _ : state) {
    auto [out, next] = forward(features, memory, params);
    benchmark::DoNotOptimize(out);
    memory = std::move(next);
  }
}
BENCHMARK(BM_Forward)->Args({8, 32})->Args({250, 200});

void BM_GradientBatch(benchmark::State& state) {
  RandomStream rng(5);
  const RrbfnParams params = random_params(8, 32, rng);
  const TrainingSet batch = make_batch(params, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient(params, batch.samples));
  }
}
BENCHMARK(BM_GradientBatch)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
