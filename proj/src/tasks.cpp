#include "m2m/tasks.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace m2m {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::Inbound ? "inbound" : "outbound"; }

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::Free: return "free";
    case TaskState::Allocated: return "allocated";
    case TaskState::PickedUp: return "picked_up";
    case TaskState::Completed: return "completed";
  }
  return "?";
}

EventLog::EventLog(std::ostream* out) : out_(out) {
  if (out_) *out_ << "t,task_id,kind,sku,event\n";
}

void EventLog::record(int t, const Task& task, std::string_view event) {
  ++count_;
  if (out_) *out_ << t << ',' << task.id << ',' << to_string(task.kind) << ',' << task.sku << ',' << event << '\n';
}

double inbound_probability(const ReleasePolicy& policy, double current_density) {
  return std::clamp(0.5 + policy.gain * (policy.target_density - current_density), policy.min_inbound,
                    policy.max_inbound);
}

Task& TaskPool::add(TaskKind kind, SkuId sku, int release_time) {
  Task task;
  task.id = next_id_++;
  task.kind = kind;
  task.sku = sku;
  task.release_time = release_time;
  ++released_;
  return tasks_.emplace(task.id, std::move(task)).first->second;
}

Task& TaskPool::get(TaskId id) {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw TaskStateError("unknown task " + std::to_string(id));
  return it->second;
}

const Task& TaskPool::get(TaskId id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw TaskStateError("unknown task " + std::to_string(id));
  return it->second;
}

void TaskPool::transition(TaskId id, TaskState next) {
  Task& task = get(id);
  const TaskState cur = task.state;
  const bool ok = (cur == TaskState::Free && next == TaskState::Allocated) ||
                  (cur == TaskState::Allocated && next == TaskState::Free) ||
                  (cur == TaskState::Allocated && next == TaskState::PickedUp) ||
                  (cur == TaskState::PickedUp && next == TaskState::Completed);
  if (!ok)
    throw TaskStateError("task " + std::to_string(id) + ": illegal transition " + std::string(to_string(cur)) +
                         " -> " + std::string(to_string(next)));
  if (next == TaskState::Completed) {
    (task.kind == TaskKind::Inbound ? completed_inbound_ : completed_outbound_)++;
    tasks_.erase(id);
    return;
  }
  task.state = next;
}

std::vector<TaskId> TaskPool::free_ids() const {
  std::vector<TaskId> out;
  for (const auto& [id, task] : tasks_)
    if (task.state == TaskState::Free) out.push_back(id);
  return out;
}

std::vector<TaskId> TaskPool::allocated_ids() const {
  std::vector<TaskId> out;
  for (const auto& [id, task] : tasks_)
    if (task.state != TaskState::Free) out.push_back(id);
  return out;
}

bool TaskPool::has_free() const {
  return std::any_of(tasks_.begin(), tasks_.end(), [](const auto& kv) { return kv.second.state == TaskState::Free; });
}

bool bind_candidates(Task& task, const Inventory& inv, const GridMap& map) {
  task.starts.clear();
  task.dests.clear();
  auto to_vertices = [&map](const auto& cells, std::vector<Vertex>& out) {
    out.reserve(cells.size());
    for (int c : cells) out.push_back(map.vertex(c));
  };
  if (task.kind == TaskKind::Outbound) {
    to_vertices(inv.cells_holding(task.sku), task.starts);
    to_vertices(map.loading_endpoints(), task.dests);
  } else {
    to_vertices(map.loading_endpoints(), task.starts);
    to_vertices(inv.empty_storage(), task.dests);
  }
  if (!task.bound()) {
    task.starts.clear();
    task.dests.clear();
    return false;
  }
  return true;
}

int release_tasks(TaskPool& pool, const Inventory& inv, const GridMap& map, int t, std::mt19937_64& rng,
                  EventLog* log) {
  const ReleasePolicy& policy = pool.policy();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int released = 0;
  for (int slot = 0; slot < policy.release_rate; ++slot) {
    if (pool.active() >= policy.active_cap) break;
    const bool inbound = unit(rng) < inbound_probability(policy, inv.density());
    SkuId sku = 0;
    if (inbound) {
      if (inv.empty_storage().empty()) continue;
      sku = std::uniform_int_distribution<SkuId>(0, inv.num_skus() - 1)(rng);
    } else {
      const std::vector<SkuId> stocked = inv.stocked_skus();
      if (stocked.empty()) continue;
      sku = stocked[std::uniform_int_distribution<std::size_t>(0, stocked.size() - 1)(rng)];
    }
    Task& task = pool.add(inbound ? TaskKind::Inbound : TaskKind::Outbound, sku, t);
    bind_candidates(task, inv, map);
    if (log) log->record(t, task, "released");
    ++released;
  }
  return released;
}

void pickup_task(TaskPool& pool, TaskId id, Inventory& inv, Vertex start, int t, EventLog* log) {
  Task& task = pool.get(id);
  if (task.state != TaskState::Allocated)
    throw TaskStateError("task " + std::to_string(id) + " picked up while " + std::string(to_string(task.state)));
  if (task.kind == TaskKind::Outbound) {
    auto held = inv.item_at(start);
    if (!held || *held != task.sku)
      throw TaskStateError("task " + std::to_string(id) + ": pickup cell does not hold SKU " +
                           std::to_string(task.sku));
    inv.remove_item(start);
  }
  pool.transition(id, TaskState::PickedUp);
  if (log) log->record(t, task, "picked_up");
}

void complete_task(TaskPool& pool, TaskId id, Inventory& inv, Vertex dest, int t, EventLog* log) {
  Task& task = pool.get(id);
  if (task.state != TaskState::PickedUp)
    throw TaskStateError("task " + std::to_string(id) + " completed while " + std::string(to_string(task.state)));
  if (task.kind == TaskKind::Inbound) inv.place_item(dest, task.sku);
  if (log) log->record(t, task, "completed");
  pool.transition(id, TaskState::Completed);
}

}  // namespace m2m
