#include <benchmark/benchmark.h>

#include "dpdate/sim.hpp"

namespace {

dpdate::SimConfig bench_config(int reps) {
  dpdate::SimConfig c;
  c.reps = reps;
  c.alphas = {0.1, 0.5, 1.0};
  c.contamination = dpdate::Contamination::pre(0.2);
  return c;
}

void BM_BiasMseSerial(benchmark::State& state) {
  const auto config = bench_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dpdate::run_bias_mse_serial(config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BiasMseParallel(benchmark::State& state) {
  auto config = bench_config(static_cast<int>(state.range(0)));
  config.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(dpdate::run_bias_mse(config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PowerSerial(benchmark::State& state) {
  const auto config = bench_config(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpdate::run_power_serial(config, 0.0, {0.0, 0.5}));
  }
}

void BM_PowerParallel(benchmark::State& state) {
  auto config = bench_config(static_cast<int>(state.range(0)));
  config.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(dpdate::run_power(config, 0.0, {0.0, 0.5}));
}

}  // namespace

BENCHMARK(BM_BiasMseSerial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiasMseParallel)->Args({500, 1})->Args({500, 2})->Args({500, 4})
    ->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PowerSerial)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerParallel)->Args({250, 1})->Args({250, 4})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
