#include "m2m/lns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace m2m {

void LnsParams::validate() const {
  if (spatial_weight < 0 || temporal_weight < 0) throw std::invalid_argument("LNS weights must be non-negative");
  if (remove_count < 1) throw std::invalid_argument("LNS remove_count must be at least 1");
  if (!(decay > 0 && decay < 1)) throw std::invalid_argument("LNS decay must lie in (0, 1)");
  if (!(initial_temperature > 0)) throw std::invalid_argument("LNS initial temperature must be positive");
}

ScheduleTimes schedule_times(const Allocation& alloc, std::span<const Vertex> agent_locations, const GridMap& map,
                             const DistanceOracle& oracle) {
  if (static_cast<int>(agent_locations.size()) != alloc.agent_count())
    throw std::invalid_argument("schedule_times: one location per agent expected");
  ScheduleTimes out(alloc.agent_count());
  for (int m = 0; m < alloc.agent_count(); ++m) {
    int pos = map.index(agent_locations[m]);
    double clock = 0.0;
    for (const Assignment& a : alloc.sequences[m]) {
      TripleTimes tt;
      const int s = map.index(a.start);
      const int d = map.index(a.dest);
      if (a.picked_up) {
        tt.at_start = clock;
      } else {
        clock += oracle.distance(pos, s);
        tt.at_start = clock;
        pos = s;
      }
      clock += oracle.distance(pos, d);
      tt.at_dest = clock;
      pos = d;
      out[m].push_back(tt);
    }
  }
  return out;
}

double score(const Allocation& alloc, std::span<const Vertex> agent_locations, const GridMap& map,
             const DistanceOracle& oracle) {
  double total = 0.0;
  for (const auto& seq : schedule_times(alloc, agent_locations, map, oracle))
    if (!seq.empty()) total += seq.back().at_dest;
  return total;
}

double relatedness(const Assignment& a, const TripleTimes& ta, const Assignment& b, const TripleTimes& tb,
                   const LnsParams& params) {
  const double spatial = l1_distance(a.dest, b.dest) + l1_distance(a.start, b.start);
  const double temporal = std::abs(ta.at_start - tb.at_start) + std::abs(ta.at_dest - tb.at_dest);
  return params.spatial_weight * spatial + params.temporal_weight * temporal;
}

RemovalResult shaw_remove(const Allocation& alloc, const ScheduleTimes& sched, const LnsParams& params,
                          std::mt19937_64& rng) {
  struct Slot {
    int agent;
    int pos;
  };
  std::vector<Slot> eligible;
  for (int m = 0; m < alloc.agent_count(); ++m)
    for (int k = 1; k < static_cast<int>(alloc.sequences[m].size()); ++k) eligible.push_back({m, k});

  RemovalResult result{alloc, {}};
  if (eligible.empty()) return result;

  const Slot seed = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
  const Assignment& seed_task = alloc.sequences[seed.agent][seed.pos];
  const TripleTimes& seed_times = sched.at(seed.agent).at(seed.pos);

  struct Ranked {
    double score;
    TaskId task;
    Slot slot;
  };
  std::vector<Ranked> ranked;
  for (const Slot& s : eligible) {
    if (s.agent == seed.agent && s.pos == seed.pos) continue;
    const Assignment& other = alloc.sequences[s.agent][s.pos];
    ranked.push_back({relatedness(seed_task, seed_times, other, sched[s.agent][s.pos], params), other.task, s});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.score != b.score ? a.score < b.score : a.task < b.task;
  });

  std::vector<int> cut(alloc.agent_count(), -1);
  auto mark = [&cut](const Slot& s) {
    if (cut[s.agent] < 0 || s.pos < cut[s.agent]) cut[s.agent] = s.pos;
  };
  mark(seed);
  const std::size_t peers = std::min<std::size_t>(params.remove_count - 1, ranked.size());
  for (std::size_t i = 0; i < peers; ++i) mark(ranked[i].slot);

  for (int m = 0; m < alloc.agent_count(); ++m) {
    if (cut[m] < 0) continue;
    auto& seq = result.alloc.sequences[m];
    for (std::size_t k = cut[m]; k < seq.size(); ++k) result.removed.push_back(seq[k].task);
    seq.resize(cut[m]);
  }
  std::sort(result.removed.begin(), result.removed.end());
  return result;
}

bool accept(double f_new, double f_curr, double temperature, std::mt19937_64& rng) {
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
  if (f_new < f_curr) return true;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return u < std::exp(-(f_new - f_curr) / temperature);
}

double temperature_at(const LnsParams& params, int iteration) {
  return params.initial_temperature * std::pow(params.decay, iteration);
}

LnsResult lns_improve(const Allocation& initial, CostMatrices& mats, const LnsContext& ctx, const LnsParams& params,
                      const LnsBudget& budget, std::mt19937_64& rng, std::ostream* trace) {
  params.validate();
  if (!budget.seconds && !budget.max_iterations) throw std::invalid_argument("LNS budget has no limit");
  using Clock = std::chrono::steady_clock;
  const auto began = Clock::now();
  auto out_of_budget = [&](int iter) {
    if (budget.max_iterations && iter >= *budget.max_iterations) return true;
    if (budget.seconds && std::chrono::duration<double>(Clock::now() - began).count() >= *budget.seconds) return true;
    return false;
  };
  auto f = [&](const Allocation& a) { return score(a, ctx.agent_locations, *ctx.map, *ctx.oracle); };

  LnsResult result;
  result.best = initial;
  result.f_initial = result.f_best = f(initial);
  Allocation curr = initial;
  double f_curr = result.f_initial;
  const int floor_tasks = initial.task_count();
  if (trace) *trace << "iter,f_curr,f_new,T,accepted\n";

  int iter = 0;
  for (; !out_of_budget(iter); ++iter) {
    const double T = temperature_at(params, iter);
    const ScheduleTimes sched = schedule_times(curr, ctx.agent_locations, *ctx.map, *ctx.oracle);
    RemovalResult removal = shaw_remove(curr, sched, params, rng);
    if (removal.removed.empty()) break;

    Allocation cand = std::move(removal.alloc);
    mats.refresh(cand);
    greedy_allocate(mats, cand, ctx.cost, ctx.policy);
    const double f_new = f(cand);
    const bool ok = cand.task_count() >= floor_tasks && accept(f_new, f_curr, T, rng);
    if (trace) *trace << iter << ',' << f_curr << ',' << f_new << ',' << T << ',' << (ok ? 1 : 0) << '\n';
    if (!ok) continue;
    ++result.accepted;
    curr = std::move(cand);
    f_curr = f_new;
    if (f_curr < result.f_best) {
      result.f_best = f_curr;
      result.best = curr;
    }
  }
  result.iterations = iter;
  mats.refresh(result.best);
  return result;
}

}  // namespace m2m
