#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "m2m/allocator.hpp"
#include "m2m/distance_oracle.hpp"
#include "m2m/grid_map.hpp"
#include "m2m/inventory.hpp"
#include "m2m/lns.hpp"
#include "m2m/mapf.hpp"
#include "m2m/tasks.hpp"

namespace m2m {

enum class AllocatorMode { Base, WSku, OneToOneBaseline };

std::string_view to_string(AllocatorMode mode);
AllocatorMode parse_allocator_mode(std::string_view text);

struct SimConfig {
  std::string map = "restricted";
  int agents = 40;
  int num_skus = 30;
  double density = 0.3;
  int release_rate = 4;
  int active_cap = 120;
  AllocatorMode mode = AllocatorMode::Base;
  CostParams cost;
  LnsParams lns;
  /// Wall-clock limit for greedy + LNS per round in seconds; 0 disables it.
  /// Any positive value makes runs timing-dependent.
  double alloc_budget_seconds = 0.0;
  /// LNS iterations per round; negative means unbounded (needs a wall budget).
  int lns_iterations = 50;
  int horizon = 3000;
  double seconds_per_tick = 1.0;
  std::uint64_t seed = 1;
  int window_ticks = 600;
  int pbs_node_cap = 5000;
  bool record_trajectory = false;

  void validate() const;
};

struct AgentState {
  int id = 0;
  Vertex location;
  std::optional<TaskId> carrying;
  TimedPath path;  // path.front() is the current cell
  int goal = -1;   // cell the committed path was planned toward
  bool stalled = false;
};

struct MetricsRow {
  int t = 0;  // simulated timestep after the tick
  int window_completions = 0;
  double throughput = 0.0;  // tasks per simulated minute over the window
  long cumulative = 0;
  double density = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

/// Wall-clock measurements, kept apart from the deterministic metrics.
struct TickTiming {
  int t = 0;
  bool allocated = false;
  double alloc_ms = 0.0;
  double plan_ms = 0.0;
  int lns_iterations = 0;
  bool pbs_fallback = false;
};

struct WorldSetup {
  std::optional<std::vector<Vertex>> agent_starts;  // default: random distinct cells
  std::optional<double> initial_density;            // default: config density
};

/// One warehouse: inventory, task pool, agents and their committed paths.
/// Each tick runs release, allocation (when tasks are free), planning,
/// movement, pickup/delivery events and metrics, in that order.
class World {
 public:
  World(const SimConfig& config, const GridMap& map, const DistanceOracle& oracle, WorldSetup setup = {},
        std::ostream* events = nullptr);

  void step();
  int now() const noexcept { return t_; }

  /// Adds a bound task outside the release process (scenario scripting).
  TaskId inject_task(TaskKind kind, SkuId sku);

  const SimConfig& config() const noexcept { return config_; }
  const GridMap& map() const noexcept { return *map_; }
  const std::vector<AgentState>& agents() const noexcept { return agents_; }
  const Allocation& allocation() const noexcept { return alloc_; }
  const Inventory& inventory() const noexcept { return inv_; }
  const TaskPool& pool() const noexcept { return pool_; }
  const std::vector<MetricsRow>& metrics() const noexcept { return metrics_; }
  const std::vector<TickTiming>& timing() const noexcept { return timing_; }
  const Trajectories& trajectory() const noexcept { return trajectory_; }
  long completed() const noexcept { return pool_.completed(); }
  long picked_up() const noexcept { return picked_up_; }
  long delivered_inbound() const noexcept { return pool_.completed_inbound(); }

 private:
  void allocate(TickTiming& timing);
  void plan(TickTiming& timing);
  void advance();
  int fire_events();
  void record(int completions);
  std::vector<Vertex> locations() const;

  SimConfig config_;
  const GridMap* map_;
  const DistanceOracle* oracle_;
  LowLevelPlanner planner_;
  std::mt19937_64 release_rng_;
  std::mt19937_64 lns_rng_;
  Inventory inv_;
  TaskPool pool_;
  EventLog log_;
  std::vector<AgentState> agents_;
  Allocation alloc_;
  std::vector<MetricsRow> metrics_;
  std::vector<TickTiming> timing_;
  std::vector<int> completions_;  // per tick
  int window_sum_ = 0;
  long picked_up_ = 0;
  Trajectories trajectory_;
  int t_ = 0;
};

struct RunSummary {
  std::uint64_t seed = 0;
  int horizon = 0;
  long released = 0;
  long completed = 0;
  double throughput = 0.0;  // completions per simulated minute over the whole horizon
  double mean_alloc_ms = 0.0;
  double max_alloc_ms = 0.0;
  int fallbacks = 0;
};

struct RunOutputs {
  std::optional<std::filesystem::path> dir;  // metrics.csv, events.csv, timing.csv, trajectory.csv
};

RunSummary run_simulation(const SimConfig& config, const GridMap& map, const DistanceOracle& oracle,
                          const RunOutputs& outputs = {});

/// Loads the map and builds the oracle, then runs.
RunSummary run_simulation(const SimConfig& config, const RunOutputs& outputs = {});

/// CSV: t,window_completions,throughput,cumulative,density
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// CSV: t,allocated,alloc_ms,plan_ms,lns_iterations,pbs_fallback
void write_timing_csv(std::ostream& out, const std::vector<TickTiming>& rows);
/// CSV: agent,t,x,y
void write_trajectory_csv(std::ostream& out, const Trajectories& traj);

}  // namespace m2m
