#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "m2m/allocator.hpp"
#include "m2m/sim.hpp"

namespace m2m {

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for fewer than two values
};

SummaryStats summarize(std::vector<double> values);

/// Cartesian product maps x densities x modes x seeds over a base config.
struct ExperimentPlan {
  SimConfig base;
  std::vector<std::string> maps;
  std::vector<double> densities;
  std::vector<AllocatorMode> modes;
  std::vector<std::uint64_t> seeds;
  std::optional<std::filesystem::path> output_root;
  bool parallel = true;  // one world per worker
};

struct RunRecord {
  SimConfig config;
  std::optional<RunSummary> summary;
  std::string error;  // set when the run threw
};

struct SummaryRow {
  std::string map;
  double density = 0.0;
  AllocatorMode mode = AllocatorMode::Base;
  int runs = 0;
  int failed = 0;
  SummaryStats throughput;
  double mean_alloc_ms = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> rows;  // one per (map, density, mode), in plan order
  int failures = 0;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

/// CSV: map,density,mode,runs,failed,mean_throughput,median_throughput,std_throughput,mean_alloc_ms
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// CSV: map,density,mode,seed,run_dir,throughput,completed,released,mean_alloc_ms,error
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);

struct BenchSize {
  int agents;
  int tasks;
};

/// The M = N ladder 50, 70, ..., 150.
std::vector<BenchSize> default_bench_ladder();

/// Random allocation instance: agents on distinct random cells, tasks bound
/// against an inventory initialised at `density`.
struct BenchInstance {
  Inventory inventory;
  std::vector<Vertex> agents;
  std::vector<Task> tasks;
};

BenchInstance make_bench_instance(const GridMap& map, BenchSize size, double density, int num_skus,
                                  std::mt19937_64& rng);

struct BenchRow {
  int agents = 0;
  int tasks = 0;
  int repeats = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
  double mean_allocated = 0.0;
};

/// Times greedy_allocate alone (matrix construction excluded) on `repeats`
/// fresh instances per size.
std::vector<BenchRow> bench_initial_allocation(const GridMap& map, const DistanceOracle& oracle,
                                               std::span<const BenchSize> sizes, int repeats, std::uint64_t seed,
                                               ExecPolicy policy = ExecPolicy::Serial, double density = 0.3,
                                               int num_skus = 30);

/// CSV: agents,tasks,repeats,mean_s,std_s,mean_allocated
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace m2m
