#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "m2m/allocator.hpp"
#include "m2m/distance_oracle.hpp"
#include "m2m/grid_map.hpp"

namespace m2m {

/// Cell indices, one per timestep; element k is the cell occupied k steps
/// after the plan origin. After its last element the agent parks there.
using TimedPath = std::vector<int>;

enum class ConflictType { Vertex, Edge };

/// Vertex: both agents on `cell` at `time`. Edge: the first agent moves
/// cell -> other_cell between `time` and `time + 1` while the second does
/// the reverse.
struct Conflict {
  ConflictType type = ConflictType::Vertex;
  int time = 0;
  int cell = 0;
  int other_cell = 0;

  bool operator==(const Conflict&) const = default;
};

/// Earliest conflict between two paths sharing a time origin. The shorter path
/// is padded by waiting at its terminal cell. At equal time a vertex conflict
/// is reported before an edge conflict spanning (time, time + 1).
std::optional<Conflict> detect_collision(const TimedPath& a, const TimedPath& b);

struct AgentConflict {
  int first;
  int second;
  Conflict conflict;
};

/// Earliest conflict among all pairs; ties go to the smallest (first, second).
std::optional<AgentConflict> first_conflict(std::span<const TimedPath> paths);

/// True when consecutive cells are equal or 4-adjacent and all are traversable.
bool path_follows_grid(const TimedPath& path, const GridMap& map);

enum class GoalMode {
  Exact,       ///< reach the goal and stay there, or fail
  BestEffort,  ///< if the goal is out of reach, park at the reachable safe cell closest to it
};

/// Space-time A* around a set of higher-priority paths. Constraint agents park
/// at their terminal cell forever, so a goal is only accepted once no
/// constraint path visits it later.
class LowLevelPlanner {
 public:
  LowLevelPlanner(const GridMap& map, const DistanceOracle& oracle);

  std::optional<TimedPath> plan(int start, int goal, std::span<const TimedPath* const> constraints, GoalMode mode,
                                int horizon) const;

  /// Exact unconstrained distance from cell to goal.
  int heuristic(int goal, int cell) const;

  /// 4 * (width + height)
  int default_horizon() const noexcept { return 4 * (map_->width() + map_->height()); }

  const GridMap& map() const noexcept { return *map_; }
  const DistanceOracle& oracle() const noexcept { return *oracle_; }

 private:
  const std::vector<int>& goal_distances(int goal) const;

  const GridMap* map_;
  const DistanceOracle* oracle_;
  mutable std::unordered_map<int, std::vector<int>> bfs_cache_;
};

struct PbsAgent {
  int start = 0;
  int goal = 0;
  GoalMode mode = GoalMode::Exact;
  /// The goal is only a preference (an idle agent holding position): ending
  /// elsewhere costs one unit per step of distance instead of a large penalty,
  /// so the search prefers moving idle agents out of the way.
  bool flexible = false;
  const TimedPath* kept = nullptr;  // reused at the root when it starts at `start`
};

struct PbsParams {
  int node_cap = 5000;
  int horizon = 0;  // 0: planner default
  std::uint64_t fallback_seed = 0;
};

struct PbsResult {
  std::vector<TimedPath> paths;
  std::vector<char> stalled;  // agents held in place by the fallback
  bool fallback = false;
  int expanded = 0;
  int low_level_calls = 0;
};

/// Priority-based search: DFS over pairwise priorities, replanning the
/// lower-priority agent and its dependents on each branch. When the node cap
/// is hit or the tree is exhausted it falls back to sequential planning in
/// which agents that cannot be routed wait in place. The returned set is
/// always collision-free.
PbsResult pbs_solve(std::span<const PbsAgent> agents, const LowLevelPlanner& planner, const PbsParams& params = {});

/// Next segment goal per agent: the current triple's start until it is picked
/// up, then its destination; an agent with an empty sequence keeps its cell.
std::vector<Vertex> segment_goals(const Allocation& alloc, std::span<const Vertex> locations);

/// CSV: agent,t,x,y
void write_paths_csv(std::ostream& out, std::span<const TimedPath> paths, const GridMap& map, int t0 = 0);

/// Executed trajectories keyed by agent: (t, cell) samples.
using Trajectories = std::map<int, std::vector<std::pair<int, Vertex>>>;

Trajectories read_paths_csv(std::istream& in);

struct ReplayIssue {
  std::string kind;  // vertex, edge, gap, jump, obstacle
  int t = 0;
  int first = -1;
  int second = -1;
  Vertex where;
};

/// Replays trajectories and reports every collision or malformed move. The
/// map is optional; without it only timing and collisions are checked.
std::vector<ReplayIssue> replay_check(const Trajectories& traj, const GridMap* map = nullptr);

}  // namespace m2m
