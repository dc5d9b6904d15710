#pragma once

// Internal scan kernels behind greedy_allocate. Each kernel has a serial
// reference and an OpenMP variant that must return identical results.

#include <optional>
#include <span>
#include <vector>

#include "m2m/allocator.hpp"

namespace m2m::detail {

/// Tasks whose rows share the same destination set and destination term.
/// For every start column p it caches min_q (w_b * C_SD[p,q] + term(q)) over
/// unclaimed member destinations, so a task's best tuple only needs a scan
/// over its own starts.
struct DestClass {
  std::vector<int> dests;          // ascending dest columns
  std::vector<double> dest_term;   // parallel to dests
  std::vector<int> starts;         // union of member start columns, ascending
  std::vector<double> best;        // per start column
  std::vector<int> best_dest;      // per start column, -1 when no dest is open
};

struct Candidate {
  double cost;
  int agent;
  int task;
  int start;
  int dest;
};

/// Strict total order: cost, then (agent, task, start, dest).
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.agent != b.agent) return a.agent < b.agent;
  if (a.task != b.task) return a.task < b.task;
  if (a.start != b.start) return a.start < b.start;
  return a.dest < b.dest;
}

struct GreedyScan {
  const CostMatrices* mats = nullptr;
  const std::vector<double>* col_min = nullptr;  // per start: min C_AS over open agents
  const std::vector<int>* col_arg = nullptr;     // per start: smallest such agent, -1 if none
  const std::vector<int>* class_of = nullptr;    // per task row
  const std::vector<DestClass>* classes = nullptr;
  const std::vector<double>* start_bonus = nullptr;  // per start, applied to outbound rows
  double base_weight = 1.0;
};

std::optional<Candidate> best_tuple_serial(const GreedyScan& scan);
std::optional<Candidate> best_tuple_parallel(const GreedyScan& scan);

/// Recomputes cls.best / cls.best_dest for the given start columns.
void class_best_serial(DestClass& cls, const CostMatrices& mats, double base_weight, std::span<const int> starts);
void class_best_parallel(DestClass& cls, const CostMatrices& mats, double base_weight, std::span<const int> starts);

/// Column minima of C_AS over agents with room in their sequence.
void column_minima_serial(const CostMatrices& mats, int max_sequence, std::vector<double>& val, std::vector<int>& arg);
void column_minima_parallel(const CostMatrices& mats, int max_sequence, std::vector<double>& val,
                            std::vector<int>& arg);

}  // namespace m2m::detail
