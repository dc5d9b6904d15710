// Serial reference vs OpenMP kernels: distance oracle construction and the
// greedy allocation scan.

#include <benchmark/benchmark.h>

#include <random>

#include "m2m/allocator.hpp"
#include "m2m/distance_oracle.hpp"
#include "m2m/harness.hpp"

using namespace m2m;

namespace {

const GridMap& restricted() {
  static const GridMap map = load_map(resolve_map_path("restricted"));
  return map;
}

const DistanceOracle& oracle() {
  static const DistanceOracle o = build_distance_oracle(restricted());
  return o;
}

void BM_Oracle(benchmark::State& state, ExecPolicy policy) {
  for (auto _ : state) benchmark::DoNotOptimize(build_distance_oracle(restricted(), policy));
}

void BM_Greedy(benchmark::State& state, ExecPolicy policy) {
  const int k = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  BenchInstance inst = make_bench_instance(restricted(), {k, k}, 0.3, 30, rng);
  AllocationInput input;
  input.agent_locations = inst.agents;
  for (const Task& t : inst.tasks)
    if (t.bound()) input.free_tasks.push_back(&t);
  const CostParams params;
  const CostMatrices base = build_matrices(input, restricted(), oracle(), nullptr, params);
  for (auto _ : state) {
    state.PauseTiming();
    CostMatrices mats = base;
    Allocation alloc(k);
    state.ResumeTiming();
    benchmark::DoNotOptimize(greedy_allocate(mats, alloc, params, policy));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Oracle, serial, ExecPolicy::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Oracle, parallel, ExecPolicy::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Greedy, serial, ExecPolicy::Serial)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Greedy, parallel, ExecPolicy::Parallel)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
