// Serial reference sweep against the OpenMP sweep on the same scenario.
#include <benchmark/benchmark.h>

#include "cellm2m/sweep.hpp"

using namespace cellm2m;

namespace {

Scenario bench_scenario() {
  return parse_config_text(
      "technology = gprs\n"
      "replications = 4\n"
      "horizon = 900\n"
      "[traffic]\n"
      "n_sm = 4500\n"
      "ri = default, 300, 60\n");
}

void BM_SweepSerial(benchmark::State& state) {
  const auto s = bench_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(s));
  state.SetItemsProcessed(state.iterations() * 12);
}

void BM_SweepParallel(benchmark::State& state) {
  const auto s = bench_scenario();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_parallel(s, threads));
  state.SetItemsProcessed(state.iterations() * 12);
}

void BM_LteReplication(benchmark::State& state) {
  const auto s = parse_config_text("technology = lte\nhorizon = 120\nesm_penetration = 10\nrs = 400\n");
  const auto point = sweep_points(s).front();
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(s, point, SimMode::arp_plus_data, 0));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LteReplication)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
