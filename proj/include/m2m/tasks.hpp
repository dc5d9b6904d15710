#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "m2m/grid_map.hpp"
#include "m2m/inventory.hpp"

namespace m2m {

using TaskId = std::int64_t;

enum class TaskKind { Inbound, Outbound };
enum class TaskState { Free, Allocated, PickedUp, Completed };

std::string_view to_string(TaskKind kind);
std::string_view to_string(TaskState state);

/// A request to move one unit of `sku`. Candidate sets are re-bound against
/// live inventory at every allocation round; empty sets mean the task is
/// deferred until it can be bound.
struct Task {
  TaskId id = 0;
  TaskKind kind = TaskKind::Inbound;
  SkuId sku = 0;
  std::vector<Vertex> starts;
  std::vector<Vertex> dests;
  TaskState state = TaskState::Free;
  int release_time = 0;

  bool bound() const noexcept { return !starts.empty() && !dests.empty(); }
};

class TaskStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// CSV sink for lifecycle transitions: t,task_id,kind,sku,event
class EventLog {
 public:
  explicit EventLog(std::ostream* out = nullptr);
  void record(int t, const Task& task, std::string_view event);
  std::size_t size() const noexcept { return count_; }

 private:
  std::ostream* out_;
  std::size_t count_ = 0;
};

struct ReleasePolicy {
  int release_rate = 4;
  int active_cap = 120;
  double target_density = 0.3;
  /// P(inbound) = clamp(0.5 + gain * (target - density), min_inbound, max_inbound)
  double gain = 2.0;
  double min_inbound = 0.05;
  double max_inbound = 0.95;
};

double inbound_probability(const ReleasePolicy& policy, double current_density);

/// Active (non-completed) tasks keyed by id, plus lifetime counters.
class TaskPool {
 public:
  explicit TaskPool(ReleasePolicy policy = {}) : policy_(policy) {}

  Task& add(TaskKind kind, SkuId sku, int release_time);
  Task& get(TaskId id);
  const Task& get(TaskId id) const;
  bool contains(TaskId id) const { return tasks_.count(id) != 0; }

  /// Enforces Free <-> Allocated -> PickedUp -> Completed. Completed tasks leave the pool.
  void transition(TaskId id, TaskState next);

  std::vector<TaskId> free_ids() const;
  std::vector<TaskId> allocated_ids() const;
  bool has_free() const;
  int active() const noexcept { return static_cast<int>(tasks_.size()); }

  const std::map<TaskId, Task>& tasks() const noexcept { return tasks_; }
  const ReleasePolicy& policy() const noexcept { return policy_; }

  long released() const noexcept { return released_; }
  long completed() const noexcept { return completed_inbound_ + completed_outbound_; }
  long completed_inbound() const noexcept { return completed_inbound_; }
  long completed_outbound() const noexcept { return completed_outbound_; }

 private:
  ReleasePolicy policy_;
  std::map<TaskId, Task> tasks_;
  TaskId next_id_ = 0;
  long released_ = 0;
  long completed_inbound_ = 0;
  long completed_outbound_ = 0;
};

/// Outbound: starts = cells holding the SKU, dests = loading endpoints.
/// Inbound: starts = loading endpoints, dests = empty storage endpoints.
/// Returns false (task deferred) when either set comes out empty.
bool bind_candidates(Task& task, const Inventory& inv, const GridMap& map);

/// Releases up to policy.release_rate new tasks without exceeding the active
/// cap. The inbound/outbound mix steers density toward the target; kinds that
/// are infeasible for the current inventory are skipped. Returns the count.
int release_tasks(TaskPool& pool, const Inventory& inv, const GridMap& map, int t, std::mt19937_64& rng,
                  EventLog* log = nullptr);

/// Agent reached `start`: outbound tasks lift the item here.
void pickup_task(TaskPool& pool, TaskId id, Inventory& inv, Vertex start, int t, EventLog* log = nullptr);

/// Agent reached `dest` carrying the item: inbound tasks store it here.
void complete_task(TaskPool& pool, TaskId id, Inventory& inv, Vertex dest, int t, EventLog* log = nullptr);

}  // namespace m2m
