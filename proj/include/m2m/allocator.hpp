#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "m2m/distance_oracle.hpp"
#include "m2m/exec_policy.hpp"
#include "m2m/grid_map.hpp"
#include "m2m/inventory.hpp"
#include "m2m/matrix.hpp"
#include "m2m/tasks.hpp"

namespace m2m {

enum class CostMode { Base, WSku };

struct CostParams {
  CostMode mode = CostMode::Base;
  double base_weight = 1.0;  // w_b
  double sku_weight = 0.25;  // w_s
  int max_sequence = 3;      // beta
};

/// One concrete (task, start, destination) choice in an agent's sequence.
struct Assignment {
  TaskId task = 0;
  Vertex start;
  Vertex dest;
  double estimated_cost = 0.0;  // travel estimate from the previous anchor through start to dest
  bool locked = false;          // carried over from a previous round (being worked)
  bool picked_up = false;

  bool operator==(const Assignment&) const = default;
};

/// Per-agent ordered task sequences. A start is claimed while its assignment
/// is not yet picked up; a destination is claimed until delivery.
struct Allocation {
  Allocation() = default;
  explicit Allocation(int agents) : sequences(agents) {}

  std::vector<std::vector<Assignment>> sequences;

  int agent_count() const noexcept { return static_cast<int>(sequences.size()); }
  int task_count() const noexcept;
  bool contains(TaskId task) const noexcept;
  std::set<Vertex> claimed_starts() const;
  std::set<Vertex> claimed_dests() const;

  bool operator==(const Allocation&) const = default;
};

/// Candidate columns of one task row in a CostMatrices instance.
struct TaskRow {
  TaskId id = 0;
  TaskKind kind = TaskKind::Inbound;
  SkuId sku = 0;
  std::vector<int> starts;  // start columns, ascending
  std::vector<int> dests;   // dest columns, ascending
};

/// The factored replacement for the M x N x P x Q cost tensor.
///
/// agent_start (C_AS) and start_dest (C_SD) hold travel estimates;
/// task_start (C_TS) and task_dest (C_TD) are 0/1 validity masks that fold in
/// membership, claims and already-allocated tasks. Everything below the index
/// spaces is re-derivable from an Allocation through refresh().
struct CostMatrices {
  std::vector<Vertex> start_cells;
  std::vector<Vertex> dest_cells;
  std::map<Vertex, int> start_column;
  std::map<Vertex, int> dest_column;
  std::vector<TaskRow> rows;

  Matrix<double> agent_origin;  // M x P, from each agent's round-start anchor
  Matrix<double> agent_start;   // C_AS, M x P
  Matrix<double> start_dest;    // C_SD, P x Q
  Matrix<std::uint8_t> task_start;  // C_TS, N x P
  Matrix<std::uint8_t> task_dest;   // C_TD, N x Q

  std::vector<int> sequence_length;  // per agent
  std::vector<char> start_claimed;   // per start column
  std::vector<char> dest_claimed;    // per dest column
  std::vector<char> task_done;       // per task row

  /// SKU terms, filled in WSku mode only. start_nn[p]: L1 distance from the
  /// item stored at start p to the closest other item of its SKU.
  /// dest_nn[sku][q]: L1 distance from dest q to the closest item of sku.
  std::vector<std::optional<int>> start_nn;
  std::map<SkuId, std::vector<std::optional<int>>> dest_nn;

  int agents() const noexcept { return static_cast<int>(agent_start.rows()); }
  int tasks() const noexcept { return static_cast<int>(rows.size()); }
  int starts() const noexcept { return static_cast<int>(start_cells.size()); }
  int dests() const noexcept { return static_cast<int>(dest_cells.size()); }

  std::optional<int> row_of(TaskId id) const;

  /// Re-derives C_AS, claims, sequence lengths, task_done and both validity
  /// masks from `alloc`. An agent whose last assignment targets a known dest
  /// column reads C_AS from that column of C_SD; otherwise from agent_origin.
  void refresh(const Allocation& alloc);
};

/// Round-start context for build_matrices.
struct AllocationInput {
  std::span<const Vertex> agent_locations;
  const Allocation* kept = nullptr;        // locked assignments carried into the round
  std::vector<const Task*> free_tasks;     // bound, ascending id
};

CostMatrices build_matrices(const AllocationInput& input, const GridMap& map, const DistanceOracle& oracle,
                            const Inventory* inv, const CostParams& params);

/// Cost of tuple (agent m, task row n, start p, dest q), or nullopt for the
/// infeasible cases: p not in S_n, q not in D_n, p claimed, q claimed, or the
/// agent's sequence already holds max_sequence tasks. NN terms are queried
/// from `inv` on demand (WSku mode requires it).
std::optional<double> tuple_cost(int m, int n, int p, int q, const CostMatrices& mats, const Inventory* inv,
                                 const CostParams& params);

struct CommittedTuple {
  int agent;
  int task;
  int start;
  int dest;
  double cost;

  bool operator==(const CommittedTuple&) const = default;
};

/// Repeatedly commits the globally cheapest feasible (m, n, p, q) until no
/// task or no feasible tuple remains. Ties go to the lexicographically
/// smallest (m, n, p, q). `mats` must be refreshed against `alloc`; both are
/// updated in place. Returns the committed tuples in order.
std::vector<CommittedTuple> greedy_allocate(CostMatrices& mats, Allocation& alloc, const CostParams& params,
                                            ExecPolicy policy = ExecPolicy::Serial);

/// Collapses each task's candidate sets to the (start, dest) pair with the
/// smallest start->dest estimate, in ascending task id order. Cells claimed by
/// earlier conversions or listed in the claimed sets are skipped; ties go to
/// the smallest (start index, dest index). Tasks left without a pair are
/// unbound (deferred). Returns the number of tasks converted.
int convert_one_to_one(std::span<Task* const> tasks, const std::set<Vertex>& claimed_starts,
                       const std::set<Vertex>& claimed_dests, const GridMap& map, const DistanceOracle& oracle);

/// CSV: agent,seq_pos,task_id,start_x,start_y,dest_x,dest_y,est_cost
void write_allocation_csv(std::ostream& out, const Allocation& alloc);

}  // namespace m2m
