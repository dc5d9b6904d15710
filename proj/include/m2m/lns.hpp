#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "m2m/allocator.hpp"
#include "m2m/distance_oracle.hpp"
#include "m2m/grid_map.hpp"

namespace m2m {

struct LnsParams {
  double spatial_weight = 9.0;   // omega_1
  double temporal_weight = 3.0;  // omega_2
  int remove_count = 3;          // N_remove
  double initial_temperature = 1.0;
  double decay = 0.99;           // alpha

  void validate() const;
};

/// Stops at whichever limit is hit first. A run bounded only by iterations is
/// fully deterministic for a given generator state.
struct LnsBudget {
  std::optional<double> seconds;
  std::optional<int> max_iterations;
};

/// Estimated arrival times for one triple, in timesteps from now.
struct TripleTimes {
  double at_start = 0.0;
  double at_dest = 0.0;
};

/// Per agent, parallel to Allocation::sequences.
using ScheduleTimes = std::vector<std::vector<TripleTimes>>;

/// Chains oracle distances from each agent's location through its sequence.
/// A picked-up triple starts its clock at the agent (the start leg is done).
ScheduleTimes schedule_times(const Allocation& alloc, std::span<const Vertex> agent_locations, const GridMap& map,
                             const DistanceOracle& oracle);

/// Total estimated duration: the last arrival time summed over agents.
double score(const Allocation& alloc, std::span<const Vertex> agent_locations, const GridMap& map,
             const DistanceOracle& oracle);

double relatedness(const Assignment& a, const TripleTimes& ta, const Assignment& b, const TripleTimes& tb,
                   const LnsParams& params);

struct RemovalResult {
  Allocation alloc;
  std::vector<TaskId> removed;  // every freed task, ascending id
};

/// Shaw removal. The seed is drawn uniformly from triples that are not first
/// in their sequence; it is removed with its remove_count - 1 most related
/// peers (ties by task id), then every triple after the earliest removed
/// position of each sequence is freed as well.
RemovalResult shaw_remove(const Allocation& alloc, const ScheduleTimes& sched, const LnsParams& params,
                          std::mt19937_64& rng);

/// Metropolis rule for minimisation.
bool accept(double f_new, double f_curr, double temperature, std::mt19937_64& rng);

/// T_k = T_0 * alpha^k
double temperature_at(const LnsParams& params, int iteration);

struct LnsContext {
  std::span<const Vertex> agent_locations;
  const GridMap* map = nullptr;
  const DistanceOracle* oracle = nullptr;
  const Inventory* inventory = nullptr;  // needed in WSku mode
  CostParams cost;
  ExecPolicy policy = ExecPolicy::Serial;
};

struct LnsResult {
  Allocation best;
  double f_initial = 0.0;
  double f_best = 0.0;
  int iterations = 0;
  int accepted = 0;
};

/// Destroy/repair/accept loop. `mats` must be the matrices `initial` was
/// built against; it is left refreshed against the returned allocation.
/// Candidates allocating fewer tasks than `initial` are rejected outright.
/// `trace` receives iter,f_curr,f_new,T,accepted when non-null.
LnsResult lns_improve(const Allocation& initial, CostMatrices& mats, const LnsContext& ctx, const LnsParams& params,
                      const LnsBudget& budget, std::mt19937_64& rng, std::ostream* trace = nullptr);

}  // namespace m2m
