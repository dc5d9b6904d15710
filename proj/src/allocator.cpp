#include "m2m/allocator.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "greedy_kernels.hpp"

namespace m2m {

int Allocation::task_count() const noexcept {
  int n = 0;
  for (const auto& seq : sequences) n += static_cast<int>(seq.size());
  return n;
}

bool Allocation::contains(TaskId task) const noexcept {
  for (const auto& seq : sequences)
    for (const Assignment& a : seq)
      if (a.task == task) return true;
  return false;
}

std::set<Vertex> Allocation::claimed_starts() const {
  std::set<Vertex> out;
  for (const auto& seq : sequences)
    for (const Assignment& a : seq)
      if (!a.picked_up) out.insert(a.start);
  return out;
}

std::set<Vertex> Allocation::claimed_dests() const {
  std::set<Vertex> out;
  for (const auto& seq : sequences)
    for (const Assignment& a : seq) out.insert(a.dest);
  return out;
}

std::optional<int> CostMatrices::row_of(TaskId id) const {
  for (int n = 0; n < tasks(); ++n)
    if (rows[n].id == id) return n;
  return std::nullopt;
}

void CostMatrices::refresh(const Allocation& alloc) {
  const int M = agents();
  if (alloc.agent_count() != M) throw std::invalid_argument("allocation agent count does not match matrices");
  sequence_length.assign(M, 0);
  start_claimed.assign(starts(), 0);
  dest_claimed.assign(dests(), 0);
  task_done.assign(tasks(), 0);

  std::unordered_set<TaskId> allocated;
  for (int m = 0; m < M; ++m) {
    const auto& seq = alloc.sequences[m];
    sequence_length[m] = static_cast<int>(seq.size());
    for (const Assignment& a : seq) {
      allocated.insert(a.task);
      if (!a.picked_up) {
        if (auto it = start_column.find(a.start); it != start_column.end()) start_claimed[it->second] = 1;
      }
      if (auto it = dest_column.find(a.dest); it != dest_column.end()) dest_claimed[it->second] = 1;
    }
    auto anchor = dest_column.end();
    if (!seq.empty() && !seq.back().locked) anchor = dest_column.find(seq.back().dest);
    if (anchor != dest_column.end()) {
      for (int p = 0; p < starts(); ++p) agent_start(m, p) = start_dest(p, anchor->second);
    } else {
      for (int p = 0; p < starts(); ++p) agent_start(m, p) = agent_origin(m, p);
    }
  }

  for (int n = 0; n < tasks(); ++n) {
    task_done[n] = allocated.count(rows[n].id) ? 1 : 0;
    task_start.fill_row(n, 0);
    task_dest.fill_row(n, 0);
    if (task_done[n]) continue;
    for (int p : rows[n].starts)
      if (!start_claimed[p]) task_start(n, p) = 1;
    for (int q : rows[n].dests)
      if (!dest_claimed[q]) task_dest(n, q) = 1;
  }
}

CostMatrices build_matrices(const AllocationInput& input, const GridMap& map, const DistanceOracle& oracle,
                            const Inventory* inv, const CostParams& params) {
  CostMatrices mats;
  std::set<Vertex> starts;
  std::set<Vertex> dests;
  for (const Task* task : input.free_tasks) {
    starts.insert(task->starts.begin(), task->starts.end());
    dests.insert(task->dests.begin(), task->dests.end());
  }
  mats.start_cells.assign(starts.begin(), starts.end());
  mats.dest_cells.assign(dests.begin(), dests.end());
  for (int p = 0; p < mats.starts(); ++p) mats.start_column.emplace(mats.start_cells[p], p);
  for (int q = 0; q < mats.dests(); ++q) mats.dest_column.emplace(mats.dest_cells[q], q);

  for (const Task* task : input.free_tasks) {
    TaskRow row{task->id, task->kind, task->sku, {}, {}};
    for (Vertex s : task->starts) row.starts.push_back(mats.start_column.at(s));
    for (Vertex d : task->dests) row.dests.push_back(mats.dest_column.at(d));
    std::sort(row.starts.begin(), row.starts.end());
    std::sort(row.dests.begin(), row.dests.end());
    mats.rows.push_back(std::move(row));
  }

  const int M = static_cast<int>(input.agent_locations.size());
  const int P = mats.starts();
  const int Q = mats.dests();
  const int N = mats.tasks();
  mats.agent_origin = Matrix<double>(M, P);
  mats.agent_start = Matrix<double>(M, P);
  mats.start_dest = Matrix<double>(P, Q);
  mats.task_start = Matrix<std::uint8_t>(N, P);
  mats.task_dest = Matrix<std::uint8_t>(N, Q);

  for (int m = 0; m < M; ++m) {
    Vertex anchor = input.agent_locations[m];
    if (input.kept && !input.kept->sequences[m].empty()) anchor = input.kept->sequences[m].back().dest;
    const int anchor_cell = map.index(anchor);
    for (int p = 0; p < P; ++p) mats.agent_origin(m, p) = oracle.distance(anchor_cell, map.index(mats.start_cells[p]));
  }
  for (int p = 0; p < P; ++p) {
    const std::uint16_t* row = oracle.row(map.index(mats.start_cells[p]));
    for (int q = 0; q < Q; ++q) mats.start_dest(p, q) = row[map.index(mats.dest_cells[q])];
  }

  if (params.mode == CostMode::WSku) {
    if (!inv) throw std::invalid_argument("WSku cost mode needs an inventory");
    mats.start_nn.assign(P, std::nullopt);
    for (int p = 0; p < P; ++p) {
      const Vertex s = mats.start_cells[p];
      if (auto sku = inv->item_at(s)) mats.start_nn[p] = inv->nearest_neighbor(*sku, s, s);
    }
    for (const TaskRow& row : mats.rows) {
      if (row.kind != TaskKind::Inbound || mats.dest_nn.count(row.sku)) continue;
      auto& terms = mats.dest_nn[row.sku];
      terms.assign(Q, std::nullopt);
      for (int q = 0; q < Q; ++q) terms[q] = inv->nearest_neighbor(row.sku, mats.dest_cells[q]);
    }
  }

  mats.refresh(input.kept ? *input.kept : Allocation(M));
  return mats;
}

std::optional<double> tuple_cost(int m, int n, int p, int q, const CostMatrices& mats, const Inventory* inv,
                                 const CostParams& params) {
  const TaskRow& row = mats.rows.at(n);
  if (!std::binary_search(row.starts.begin(), row.starts.end(), p)) return std::nullopt;
  if (!std::binary_search(row.dests.begin(), row.dests.end(), q)) return std::nullopt;
  if (mats.start_claimed.at(p)) return std::nullopt;
  if (mats.dest_claimed.at(q)) return std::nullopt;
  if (mats.sequence_length.at(m) >= params.max_sequence) return std::nullopt;

  const double travel = mats.agent_start(m, p) + mats.start_dest(p, q);
  if (params.mode == CostMode::Base) return travel;
  if (!inv) throw std::invalid_argument("WSku cost mode needs an inventory");
  double cost = params.base_weight * travel;
  if (row.kind == TaskKind::Outbound) {
    const Vertex s = mats.start_cells[p];
    cost -= params.sku_weight * inv->nearest_neighbor(row.sku, s, s).value_or(0);
  } else {
    cost += params.sku_weight * inv->nearest_neighbor(row.sku, mats.dest_cells[q]).value_or(0);
  }
  return cost;
}

std::vector<CommittedTuple> greedy_allocate(CostMatrices& mats, Allocation& alloc, const CostParams& params,
                                            ExecPolicy policy) {
  using detail::DestClass;
  const bool parallel = policy == ExecPolicy::Parallel;
  const bool wsku = params.mode == CostMode::WSku;
  const int P = mats.starts();
  const double w_b = wsku ? params.base_weight : 1.0;

  // Group open rows by (destination set, destination term).
  std::vector<DestClass> classes;
  std::vector<int> class_of(mats.tasks(), -1);
  {
    std::map<std::pair<SkuId, std::vector<int>>, int> index;
    std::vector<std::set<int>> class_starts;
    for (int n = 0; n < mats.tasks(); ++n) {
      if (mats.task_done[n]) continue;
      const TaskRow& row = mats.rows[n];
      const SkuId term_key = (wsku && row.kind == TaskKind::Inbound) ? row.sku : -1;
      auto [it, inserted] = index.try_emplace({term_key, row.dests}, static_cast<int>(classes.size()));
      if (inserted) {
        DestClass cls;
        cls.dests = row.dests;
        cls.dest_term.assign(row.dests.size(), 0.0);
        if (term_key >= 0) {
          const auto& nn = mats.dest_nn.at(term_key);
          for (std::size_t k = 0; k < row.dests.size(); ++k)
            cls.dest_term[k] = params.sku_weight * nn[row.dests[k]].value_or(0);
        }
        cls.best.assign(P, std::numeric_limits<double>::infinity());
        cls.best_dest.assign(P, -1);
        classes.push_back(std::move(cls));
        class_starts.emplace_back();
      }
      class_of[n] = it->second;
      class_starts[it->second].insert(row.starts.begin(), row.starts.end());
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      classes[c].starts.assign(class_starts[c].begin(), class_starts[c].end());
      if (parallel)
        detail::class_best_parallel(classes[c], mats, w_b, classes[c].starts);
      else
        detail::class_best_serial(classes[c], mats, w_b, classes[c].starts);
    }
  }

  std::vector<double> start_bonus;
  if (wsku) {
    start_bonus.assign(P, 0.0);
    for (int p = 0; p < P; ++p) start_bonus[p] = -params.sku_weight * mats.start_nn[p].value_or(0);
  }

  std::vector<double> col_min;
  std::vector<int> col_arg;
  auto update_minima = [&] {
    if (parallel)
      detail::column_minima_parallel(mats, params.max_sequence, col_min, col_arg);
    else
      detail::column_minima_serial(mats, params.max_sequence, col_min, col_arg);
  };
  update_minima();

  detail::GreedyScan scan;
  scan.mats = &mats;
  scan.col_min = &col_min;
  scan.col_arg = &col_arg;
  scan.class_of = &class_of;
  scan.classes = &classes;
  scan.start_bonus = wsku ? &start_bonus : nullptr;
  scan.base_weight = w_b;

  std::vector<CommittedTuple> committed;
  std::vector<int> stale;
  while (true) {
    auto best = parallel ? detail::best_tuple_parallel(scan) : detail::best_tuple_serial(scan);
    if (!best) break;
    const auto [cost, m, n, p, q] = *best;

    alloc.sequences[m].push_back(Assignment{mats.rows[n].id, mats.start_cells[p], mats.dest_cells[q],
                                            mats.agent_start(m, p) + mats.start_dest(p, q), false, false});
    committed.push_back(CommittedTuple{m, n, p, q, cost});

    // The agent's new anchor is d_q.
    ++mats.sequence_length[m];
    for (int s = 0; s < P; ++s) mats.agent_start(m, s) = mats.start_dest(s, q);

    mats.task_done[n] = 1;
    mats.task_start.fill_row(n, 0);
    mats.task_dest.fill_row(n, 0);
    mats.start_claimed[p] = 1;
    mats.task_start.fill_col(p, 0);
    mats.dest_claimed[q] = 1;
    mats.task_dest.fill_col(q, 0);

    update_minima();
    for (DestClass& cls : classes) {
      if (!std::binary_search(cls.dests.begin(), cls.dests.end(), q)) continue;
      stale.clear();
      for (int s : cls.starts)
        if (cls.best_dest[s] == q) stale.push_back(s);
      if (stale.empty()) continue;
      if (parallel)
        detail::class_best_parallel(cls, mats, w_b, stale);
      else
        detail::class_best_serial(cls, mats, w_b, stale);
    }
  }
  return committed;
}

int convert_one_to_one(std::span<Task* const> tasks, const std::set<Vertex>& claimed_starts,
                       const std::set<Vertex>& claimed_dests, const GridMap& map, const DistanceOracle& oracle) {
  std::set<Vertex> used_starts = claimed_starts;
  std::set<Vertex> used_dests = claimed_dests;
  int converted = 0;
  for (Task* task : tasks) {
    struct Pick {
      int cost, s_idx, d_idx;
      Vertex s, d;
    };
    std::optional<Pick> best;
    for (Vertex s : task->starts) {
      if (used_starts.count(s)) continue;
      const int s_idx = map.index(s);
      const std::uint16_t* row = oracle.row(s_idx);
      for (Vertex d : task->dests) {
        if (used_dests.count(d)) continue;
        const int d_idx = map.index(d);
        Pick cand{row[d_idx], s_idx, d_idx, s, d};
        if (!best || std::tie(cand.cost, cand.s_idx, cand.d_idx) < std::tie(best->cost, best->s_idx, best->d_idx))
          best = cand;
      }
    }
    if (!best) {
      task->starts.clear();
      task->dests.clear();
      continue;
    }
    task->starts = {best->s};
    task->dests = {best->d};
    used_starts.insert(best->s);
    used_dests.insert(best->d);
    ++converted;
  }
  return converted;
}

void write_allocation_csv(std::ostream& out, const Allocation& alloc) {
  out << "agent,seq_pos,task_id,start_x,start_y,dest_x,dest_y,est_cost\n";
  for (int m = 0; m < alloc.agent_count(); ++m) {
    const auto& seq = alloc.sequences[m];
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const Assignment& a = seq[k];
      out << m << ',' << k << ',' << a.task << ',' << a.start.x << ',' << a.start.y << ',' << a.dest.x << ','
          << a.dest.y << ',' << a.estimated_cost << '\n';
    }
  }
}

}  // namespace m2m
