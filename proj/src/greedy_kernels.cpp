#include "greedy_kernels.hpp"

#include <limits>

namespace m2m::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Candidate> best_for_task(const GreedyScan& scan, int n) {
  const CostMatrices& mats = *scan.mats;
  if (mats.task_done[n]) return std::nullopt;
  const TaskRow& row = mats.rows[n];
  const DestClass& cls = (*scan.classes)[(*scan.class_of)[n]];
  const bool bonus = row.kind == TaskKind::Outbound && scan.start_bonus != nullptr;
  std::optional<Candidate> best;
  for (int p : row.starts) {
    if (!mats.task_start(n, p)) continue;
    const int m = (*scan.col_arg)[p];
    const int q = cls.best_dest[p];
    if (m < 0 || q < 0) continue;
    double cost = scan.base_weight * (*scan.col_min)[p] + cls.best[p];
    if (bonus) cost += (*scan.start_bonus)[p];
    Candidate c{cost, m, n, p, q};
    if (!best || better(c, *best)) best = c;
  }
  return best;
}

double class_value(const DestClass& cls, const CostMatrices& mats, double w_b, int p, int& arg) {
  double best = kInf;
  arg = -1;
  for (std::size_t k = 0; k < cls.dests.size(); ++k) {
    const int q = cls.dests[k];
    if (mats.dest_claimed[q]) continue;
    const double v = w_b * mats.start_dest(p, q) + cls.dest_term[k];
    if (v < best) {
      best = v;
      arg = q;
    }
  }
  return best;
}

}  // namespace

std::optional<Candidate> best_tuple_serial(const GreedyScan& scan) {
  std::optional<Candidate> best;
  for (int n = 0; n < scan.mats->tasks(); ++n) {
    auto c = best_for_task(scan, n);
    if (c && (!best || better(*c, *best))) best = c;
  }
  return best;
}

std::optional<Candidate> best_tuple_parallel(const GreedyScan& scan) {
  std::optional<Candidate> best;
  const int tasks = scan.mats->tasks();
#pragma omp parallel
  {
    std::optional<Candidate> local;
#pragma omp for schedule(dynamic, 8) nowait
    for (int n = 0; n < tasks; ++n) {
      auto c = best_for_task(scan, n);
      if (c && (!local || better(*c, *local))) local = c;
    }
#pragma omp critical(m2m_best_tuple)
    {
      if (local && (!best || better(*local, *best))) best = local;
    }
  }
  return best;
}

void class_best_serial(DestClass& cls, const CostMatrices& mats, double base_weight, std::span<const int> starts) {
  for (int p : starts) cls.best[p] = class_value(cls, mats, base_weight, p, cls.best_dest[p]);
}

void class_best_parallel(DestClass& cls, const CostMatrices& mats, double base_weight, std::span<const int> starts) {
  const long count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    const int p = starts[i];
    cls.best[p] = class_value(cls, mats, base_weight, p, cls.best_dest[p]);
  }
}

namespace {

void column_minimum(const CostMatrices& mats, int max_sequence, int p, double& val, int& arg) {
  val = kInf;
  arg = -1;
  for (int m = 0; m < mats.agents(); ++m) {
    if (mats.sequence_length[m] >= max_sequence) continue;
    if (mats.agent_start(m, p) < val) {
      val = mats.agent_start(m, p);
      arg = m;
    }
  }
}

}  // namespace

void column_minima_serial(const CostMatrices& mats, int max_sequence, std::vector<double>& val,
                          std::vector<int>& arg) {
  val.resize(mats.starts());
  arg.resize(mats.starts());
  for (int p = 0; p < mats.starts(); ++p) column_minimum(mats, max_sequence, p, val[p], arg[p]);
}

void column_minima_parallel(const CostMatrices& mats, int max_sequence, std::vector<double>& val,
                            std::vector<int>& arg) {
  val.resize(mats.starts());
  arg.resize(mats.starts());
  const int starts = mats.starts();
#pragma omp parallel for schedule(static)
  for (int p = 0; p < starts; ++p) column_minimum(mats, max_sequence, p, val[p], arg[p]);
}

}  // namespace m2m::detail
