#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "m2m/harness.hpp"
#include "m2m/lns.hpp"
#include "support.hpp"

using namespace m2m;

namespace {

Assignment triple(TaskId id, Vertex s, Vertex d, bool picked = false) {
  Assignment a;
  a.task = id;
  a.start = s;
  a.dest = d;
  a.picked_up = picked;
  return a;
}

// Chains Dijkstra distances along each sequence, independently of schedule_times.
double summed_duration(const GridMap& map, const Allocation& alloc, const std::vector<Vertex>& locs) {
  double total = 0;
  for (int m = 0; m < alloc.agent_count(); ++m) {
    Vertex cur = locs[m];
    double clock = 0;
    for (const Assignment& a : alloc.sequences[m]) {
      if (!a.picked_up) {
        clock += testing::dijkstra(map, map.index(a.start))[map.index(cur)];
        cur = a.start;
      }
      clock += testing::dijkstra(map, map.index(a.dest))[map.index(cur)];
      cur = a.dest;
    }
    total += clock;
  }
  return total;
}

}  // namespace

TEST_SUITE("lns") {

TEST_CASE("relatedness examples") {
  const LnsParams params;
  const Assignment a = triple(0, {2, 2}, {5, 5});
  const TripleTimes ta{3, 8};
  CHECK(relatedness(a, ta, a, ta, params) == 0.0);
  const Assignment b = triple(1, {3, 2}, {5, 7});
  CHECK(relatedness(a, ta, b, ta, params) == 27.0);
  CHECK(relatedness(a, ta, a, TripleTimes{7, 12}, params) == 24.0);
}

TEST_CASE("score examples and summation oracle") {
  const GridMap map = testing::map_from_rows({"E....L", "......", "E....L"});
  const DistanceOracle oracle = build_distance_oracle(map);
  CHECK(score(Allocation(2), std::vector<Vertex>{{1, 1}, {2, 1}}, map, oracle) == 0.0);

  Allocation one(1);
  one.sequences[0].push_back(triple(0, {0, 0}, {3, 0}));
  // cost(a,s) = 2, cost(s,d) = 3
  CHECK(score(one, std::vector<Vertex>{{0, 2}}, map, oracle) == 5.0);

  Allocation multi(2);
  multi.sequences[0] = {triple(0, {0, 0}, {5, 0}), triple(1, {5, 2}, {0, 2})};
  multi.sequences[1] = {triple(2, {0, 2}, {5, 2}, true), triple(3, {5, 0}, {0, 0})};
  const std::vector<Vertex> locs{{3, 1}, {2, 2}};
  CHECK(score(multi, locs, map, oracle) == summed_duration(map, multi, locs));
  const ScheduleTimes sched = schedule_times(multi, locs, map, oracle);
  for (const auto& seq : sched)
    for (std::size_t k = 0; k < seq.size(); ++k) {
      CHECK(seq[k].at_dest >= seq[k].at_start);
      if (k > 0) CHECK(seq[k].at_start >= seq[k - 1].at_dest);
    }
}

TEST_CASE("in-progress single task is never removed") {
  Allocation alloc(1);
  alloc.sequences[0].push_back(triple(0, {0, 0}, {1, 0}));
  const ScheduleTimes sched{{TripleTimes{1, 2}}};
  std::mt19937_64 rng(1);
  const RemovalResult r = shaw_remove(alloc, sched, {}, rng);
  CHECK(r.removed.empty());
  CHECK(r.alloc == alloc);
}

TEST_CASE("removing B from [A,B,C] frees C") {
  Allocation alloc(1);
  alloc.sequences[0] = {triple(0, {0, 0}, {1, 0}), triple(1, {2, 0}, {3, 0}), triple(2, {4, 0}, {5, 0})};
  const ScheduleTimes sched{{TripleTimes{1, 2}, TripleTimes{3, 4}, TripleTimes{5, 6}}};
  LnsParams params;
  params.remove_count = 1;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const RemovalResult r = shaw_remove(alloc, sched, params, rng);
    REQUIRE(r.alloc.sequences[0].size() >= 1);
    CHECK(r.alloc.sequences[0][0].task == 0);
    if (r.alloc.sequences[0].size() == 1) CHECK(r.removed == std::vector<TaskId>{1, 2});
    else CHECK(r.removed == std::vector<TaskId>{2});
  }
}

TEST_CASE("shaw removal matches a rank-order oracle") {
  // Five removable triples spread over three agents, each behind a first
  // triple, with distinct pairwise relatedness.
  Allocation alloc(3);
  alloc.sequences[0] = {triple(100, {0, 0}, {0, 1}), triple(1, {2, 0}, {2, 1}), triple(2, {9, 3}, {9, 5})};
  alloc.sequences[1] = {triple(101, {1, 9}, {1, 8}), triple(3, {3, 1}, {4, 1})};
  alloc.sequences[2] = {triple(102, {7, 7}, {7, 6}), triple(4, {6, 0}, {6, 2}), triple(5, {20, 20}, {21, 20})};
  ScheduleTimes sched(3);
  double clock = 0;
  for (int m = 0; m < 3; ++m)
    for (std::size_t k = 0; k < alloc.sequences[m].size(); ++k) {
      clock += 1.5 * (m + 1) + k;
      sched[m].push_back({clock, clock + 2});
    }
  const LnsParams params;  // remove 3

  struct Slot {
    int m;
    std::size_t k;
  };
  std::vector<Slot> eligible;
  for (int m = 0; m < 3; ++m)
    for (std::size_t k = 1; k < alloc.sequences[m].size(); ++k) eligible.push_back({m, k});
  // Expected freed set per seed triple.
  std::map<TaskId, std::set<TaskId>> expected;
  for (const Slot& seed : eligible) {
    std::vector<std::pair<double, Slot>> ranked;
    for (const Slot& o : eligible) {
      if (o.m == seed.m && o.k == seed.k) continue;
      const auto& a = alloc.sequences[seed.m][seed.k];
      const auto& b = alloc.sequences[o.m][o.k];
      const auto& ta = sched[seed.m][seed.k];
      const auto& tb = sched[o.m][o.k];
      const double r = 9.0 * (l1_distance(a.dest, b.dest) + l1_distance(a.start, b.start)) +
                       3.0 * (std::abs(ta.at_start - tb.at_start) + std::abs(ta.at_dest - tb.at_dest));
      ranked.push_back({r, o});
    }
    std::sort(ranked.begin(), ranked.end(), [&](auto& x, auto& y) {
      const TaskId tx = alloc.sequences[x.second.m][x.second.k].task;
      const TaskId ty = alloc.sequences[y.second.m][y.second.k].task;
      return x.first != y.first ? x.first < y.first : tx < ty;
    });
    std::vector<Slot> picked{seed, ranked[0].second, ranked[1].second};
    std::set<TaskId> freed;
    for (const Slot& s : picked)
      for (std::size_t k = s.k; k < alloc.sequences[s.m].size(); ++k) freed.insert(alloc.sequences[s.m][k].task);
    expected[alloc.sequences[seed.m][seed.k].task] = freed;
  }

  std::set<std::set<TaskId>> outcomes;
  for (const auto& [task, set] : expected) outcomes.insert(set);
  std::set<std::set<TaskId>> seen;
  for (int seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    const RemovalResult r = shaw_remove(alloc, sched, params, rng);
    const std::set<TaskId> got(r.removed.begin(), r.removed.end());
    REQUIRE(outcomes.count(got) == 1);
    seen.insert(got);
    for (const auto& seq : r.alloc.sequences) REQUIRE_FALSE(seq.empty());  // first triples stay
  }
  CHECK(seen == outcomes);
}

TEST_CASE("acceptance rule") {
  std::mt19937_64 rng(3);
  CHECK(accept(4.0, 5.0, 1e-9, rng));
  int equal = 0, one = 0, frozen = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    equal += accept(5.0, 5.0, 1.0, rng);
    one += accept(6.0, 5.0, 1.0, rng);
    frozen += accept(6.0, 5.0, 1e-9, rng);
  }
  CHECK(equal == trials);
  CHECK(one / static_cast<double>(trials) == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
  CHECK(frozen == 0);
  CHECK_THROWS(accept(1, 2, 0.0, rng));
}

TEST_CASE("temperature follows the geometric schedule") {
  LnsParams params;
  CHECK(temperature_at(params, 0) == 1.0);
  CHECK(temperature_at(params, 10) == doctest::Approx(std::pow(0.99, 10)));
  params.initial_temperature = 2.5;
  params.decay = 0.5;
  CHECK(temperature_at(params, 3) == doctest::Approx(0.3125));
  params.decay = 1.0;
  CHECK_THROWS(params.validate());
}

TEST_CASE("lns never worsens and keeps invariants") {
  const GridMap map = load_map(resolve_map_path("restricted"));
  const DistanceOracle oracle = build_distance_oracle(map);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    std::mt19937_64 rng(seed);
    BenchInstance inst = make_bench_instance(map, {15, 40}, 0.3, 30, rng);
    AllocationInput input;
    input.agent_locations = inst.agents;
    for (const Task& t : inst.tasks)
      if (t.bound()) input.free_tasks.push_back(&t);
    const CostParams cost;
    CostMatrices mats = build_matrices(input, map, oracle, nullptr, cost);
    Allocation initial(15);
    greedy_allocate(mats, initial, cost);
    LnsContext ctx{inst.agents, &map, &oracle, nullptr, cost, ExecPolicy::Serial};
    std::ostringstream trace;
    LnsBudget budget;
    budget.max_iterations = 60;
    const LnsResult r = lns_improve(initial, mats, ctx, {}, budget, rng, &trace);
    CHECK(r.iterations == 60);
    CHECK(r.f_best <= r.f_initial);
    CHECK(r.f_best == doctest::Approx(summed_duration(map, r.best, inst.agents)));
    CHECK(r.best.task_count() >= initial.task_count());
    CHECK(trace.str().rfind("iter,f_curr,f_new,T,accepted\n", 0) == 0);
    std::set<Vertex> s, d;
    std::set<TaskId> ids;
    for (const auto& seq : r.best.sequences) {
      CHECK(seq.size() <= 3);
      for (const Assignment& a : seq) {
        CHECK(s.insert(a.start).second);
        CHECK(d.insert(a.dest).second);
        CHECK(ids.insert(a.task).second);
      }
    }
    // matrices follow the returned allocation
    CostMatrices fresh = mats;
    fresh.refresh(r.best);
    CHECK(fresh.task_start == mats.task_start);
    CHECK(fresh.agent_start == mats.agent_start);
  }
}

TEST_CASE("zero budget returns the initial allocation") {
  const GridMap map = load_map(resolve_map_path("restricted"));
  const DistanceOracle oracle = build_distance_oracle(map);
  std::mt19937_64 rng(2);
  BenchInstance inst = make_bench_instance(map, {10, 20}, 0.3, 30, rng);
  AllocationInput input;
  input.agent_locations = inst.agents;
  for (const Task& t : inst.tasks)
    if (t.bound()) input.free_tasks.push_back(&t);
  CostMatrices mats = build_matrices(input, map, oracle, nullptr, {});
  Allocation initial(10);
  greedy_allocate(mats, initial, {});
  LnsContext ctx{inst.agents, &map, &oracle, nullptr, {}, ExecPolicy::Serial};
  LnsBudget none;
  none.seconds = 0.0;
  const LnsResult r = lns_improve(initial, mats, ctx, {}, none, rng);
  CHECK(r.iterations == 0);
  CHECK(r.best == initial);
  CHECK_THROWS(lns_improve(initial, mats, ctx, {}, LnsBudget{}, rng));
}

}  // TEST_SUITE
