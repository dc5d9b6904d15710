// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 1 3 9      run a subset
//
// Exit status is non-zero when any selected criterion fails. Tolerances are
// pinned below and never adjusted by flags.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "brute_greedy.hpp"
#include "m2m/harness.hpp"
#include "m2m/kd_tree.hpp"
#include "m2m/lns.hpp"
#include "m2m/sim.hpp"

using namespace m2m;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr int kGreedyInstances = 200;
constexpr double kGreedySeconds = 10.0;
constexpr int kLnsInstances = 10;
constexpr double kLnsBudgetSeconds = 0.5;
constexpr double kLnsSeconds = 30.0;
constexpr int kMetropolisTrials = 100000;
constexpr double kMetropolisTarget = 0.358;
constexpr double kMetropolisTolerance = 0.010;
constexpr double kMetropolisFrozenT = 1e-9;
constexpr double kMetropolisSeconds = 5.0;
constexpr int kSafetySeeds = 100;
constexpr int kSafetyHorizon = 500;
constexpr int kKdOperations = 10000;
constexpr double kBenchMaxSeconds = 2.0;
constexpr double kBenchNoise = 0.10;
constexpr int kBenchRepeats = 10;
constexpr int kReproSeeds = 10;
constexpr int kReproHorizon = 3000;
constexpr double kHighDensity = 0.9;
constexpr double kLowDensity = 0.3;
constexpr double kHighDensityGain = 0.20;
constexpr double kLowDensitySlack = 0.02;
constexpr double kWSkuSlack = 0.01;
constexpr int kDensityWindow = 1000;
constexpr double kDensityBand = 0.05;
constexpr int kDeterminismHorizon = 300;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MapCache {
  std::map<std::string, std::pair<GridMap, DistanceOracle>> maps;
  const std::pair<GridMap, DistanceOracle>& get(const std::string& name) {
    auto it = maps.find(name);
    if (it == maps.end()) {
      GridMap map = load_map(resolve_map_path(name));
      DistanceOracle oracle = build_distance_oracle(map, ExecPolicy::Parallel);
      it = maps.emplace(name, std::make_pair(std::move(map), std::move(oracle))).first;
    }
    return it->second;
  }
};
MapCache g_maps;

// ---------------------------------------------------------------------------

Outcome greedy_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int mismatches = 0, committed = 0;
  for (int i = 0; i < kGreedyInstances; ++i) {
    testing::SmallInstance in = testing::random_small_instance(rng, 3, 4, false, false);
    const DistanceOracle oracle = build_distance_oracle(in.map);
    const CostParams params;
    const auto want = testing::brute_greedy(in, params);
    const auto got = testing::factored_greedy(in, params, oracle);
    committed += static_cast<int>(want.size());
    if (!testing::same_sequence(got, want)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kGreedySeconds,
          fmt("%d/%d instances identical (%d tuples), %.2f s (limit %.0f s)", kGreedyInstances - mismatches,
              kGreedyInstances, committed, secs, kGreedySeconds)};
}

Outcome lns_efficacy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& [map, oracle] = g_maps.get("restricted");
  bool monotone = true;
  double sum_rel = 0.0;
  std::string per_seed;
  for (int seed = 1; seed <= kLnsInstances; ++seed) {
    std::mt19937_64 rng(seed);
    BenchInstance inst = make_bench_instance(map, {40, 120}, 0.3, 30, rng);
    AllocationInput input;
    input.agent_locations = inst.agents;
    for (const Task& t : inst.tasks)
      if (t.bound()) input.free_tasks.push_back(&t);
    const CostParams cost;
    CostMatrices mats = build_matrices(input, map, oracle, nullptr, cost);
    Allocation initial(40);
    greedy_allocate(mats, initial, cost);
    LnsContext ctx{inst.agents, &map, &oracle, nullptr, cost, ExecPolicy::Serial};
    LnsBudget budget;
    budget.seconds = kLnsBudgetSeconds;
    const LnsResult r = lns_improve(initial, mats, ctx, LnsParams{}, budget, rng);
    monotone = monotone && r.f_best <= r.f_initial;
    const double rel = r.f_initial > 0 ? (r.f_initial - r.f_best) / r.f_initial : 0.0;
    sum_rel += rel;
    per_seed += fmt(" %.3f%%", 100 * rel);
  }
  const double mean = sum_rel / kLnsInstances;
  const double secs = seconds_since(t0);
  return {monotone && mean > 0 && secs < kLnsSeconds,
          fmt("f_final <= f_initial on all runs: %s; mean improvement %.3f%% (per seed:%s); %.1f s",
              monotone ? "yes" : "no", 100 * mean, per_seed.c_str(), secs)};
}

Outcome metropolis() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  int warm = 0, frozen = 0;
  for (int i = 0; i < kMetropolisTrials; ++i) warm += accept(1.0, 0.0, 1.0, rng);
  for (int i = 0; i < kMetropolisTrials; ++i) frozen += accept(1.0, 0.0, kMetropolisFrozenT, rng);
  const double rate = static_cast<double>(warm) / kMetropolisTrials;
  const double secs = seconds_since(t0);
  return {std::abs(rate - kMetropolisTarget) <= kMetropolisTolerance && frozen == 0 && secs < kMetropolisSeconds,
          fmt("rate(d=1,T=1) = %.4f (target %.3f +/- %.3f, e^-1 = %.4f); rate(T=1e-9) = %d/%d; %.2f s", rate,
              kMetropolisTarget, kMetropolisTolerance, std::exp(-1.0), frozen, kMetropolisTrials, secs)};
}

Outcome collision_safety() {
  const auto t0 = std::chrono::steady_clock::now();
  int runs = 0, issues = 0, aborted = 0;
  long completed = 0;
  std::string first_problem;
  for (const char* name : {"restricted", "open_top", "open"}) {
    const auto& [map, oracle] = g_maps.get(name);
    for (int seed = 1; seed <= kSafetySeeds; ++seed) {
      SimConfig cfg;
      cfg.map = name;
      cfg.seed = static_cast<std::uint64_t>(seed);
      cfg.horizon = kSafetyHorizon;
      cfg.record_trajectory = true;
      try {
        World world(cfg, map, oracle);
        for (int t = 0; t < cfg.horizon; ++t) world.step();
        // Round-trip through the CSV the validate subcommand reads.
        std::stringstream csv;
        write_trajectory_csv(csv, world.trajectory());
        const auto found = replay_check(read_paths_csv(csv), &map);
        issues += static_cast<int>(found.size());
        if (!found.empty() && first_problem.empty())
          first_problem = fmt("%s seed %d: %s at t=%d", name, seed, found[0].kind.c_str(), found[0].t);
        completed += world.completed();
      } catch (const std::exception& e) {
        ++aborted;
        if (first_problem.empty()) first_problem = fmt("%s seed %d: %s", name, seed, e.what());
      }
      ++runs;
      if (runs % 50 == 0) std::cerr << "  [4] " << runs << " runs, " << seconds_since(t0) << " s\n";
    }
  }
  return {issues == 0 && aborted == 0,
          fmt("%d runs x %d steps, %d replay issues, %d aborted, %ld tasks completed, %.0f s%s%s", runs,
              kSafetyHorizon, issues, aborted, completed, seconds_since(t0), first_problem.empty() ? "" : "; first: ",
              first_problem.c_str())};
}

Outcome kd_exactness() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> coord(0, 60);
  KdTree tree;
  std::set<Vertex> shadow;
  int mismatches = 0, queries = 0;
  for (int i = 0; i < kKdOperations; ++i) {
    const Vertex v{coord(rng), coord(rng)};
    switch (rng() % 3) {
      case 0:
        mismatches += tree.insert(v) != shadow.insert(v).second;
        break;
      case 1:
        mismatches += tree.erase(v) != (shadow.erase(v) == 1);
        break;
      default: {
        ++queries;
        std::optional<int> want;
        for (Vertex p : shadow) {
          const int d = l1_distance(p, v);
          if (!want || d < *want) want = d;
        }
        const auto got = tree.nearest(v);
        if (got.has_value() != want.has_value() || (got && got->distance != *want)) ++mismatches;
      }
    }
    if (tree.size() != static_cast<int>(shadow.size())) ++mismatches;
  }
  return {mismatches == 0,
          fmt("%d operations (%d NN queries), %d mismatches against linear scan", kKdOperations, queries, mismatches)};
}

Outcome scalability() {
  const auto& [map, oracle] = g_maps.get("restricted");
  const auto ladder = default_bench_ladder();
  const auto rows = bench_initial_allocation(map, oracle, ladder, kBenchRepeats, 1, ExecPolicy::Serial);
  bool ordered = true;
  std::string series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    series += fmt(" %dx%d=%.4fs", rows[i].agents, rows[i].tasks, rows[i].mean_s);
    if (i > 0 && rows[i].mean_s < (1.0 - kBenchNoise) * rows[i - 1].mean_s) ordered = false;
  }
  const double top = rows.back().mean_s;
  return {top <= kBenchMaxSeconds && ordered,
          fmt("M=N=150 mean %.4f s (limit %.1f s); non-decreasing within %.0f%%: %s;%s", top, kBenchMaxSeconds,
              100 * kBenchNoise, ordered ? "yes" : "no", series.c_str())};
}

// Shared by criteria 7, 8 and 10.
struct ReproRun {
  double density = 0;
  AllocatorMode mode = AllocatorMode::Base;
  std::uint64_t seed = 0;
  double throughput = 0;
  std::vector<double> window_density;  // mean per window
  double worst_tick_deviation = 0;
  std::string error;
};

std::vector<ReproRun>& repro_runs(bool need_wsku) {
  static std::vector<ReproRun> runs;
  static bool have_core = false, have_wsku = false;
  std::vector<ReproRun> todo;
  if (!have_core) {
    for (double d : {kHighDensity, kLowDensity})
      for (AllocatorMode m : {AllocatorMode::Base, AllocatorMode::OneToOneBaseline})
        for (int s = 1; s <= kReproSeeds; ++s) todo.push_back({d, m, static_cast<std::uint64_t>(s)});
    have_core = true;
  }
  if (need_wsku && !have_wsku) {
    for (int s = 1; s <= kReproSeeds; ++s) todo.push_back({kLowDensity, AllocatorMode::WSku, static_cast<std::uint64_t>(s)});
    have_wsku = true;
  }
  if (todo.empty()) return runs;

  const auto& [map, oracle] = g_maps.get("restricted");
  const auto t0 = std::chrono::steady_clock::now();
  int finished = 0;
  const long n = static_cast<long>(todo.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    ReproRun& r = todo[i];
    SimConfig cfg;
    cfg.density = r.density;
    cfg.mode = r.mode;
    cfg.seed = r.seed;
    cfg.horizon = kReproHorizon;
    try {
      World world(cfg, map, oracle);
      for (int t = 0; t < cfg.horizon; ++t) world.step();
      r.throughput = world.completed() / (cfg.horizon * cfg.seconds_per_tick / 60.0);
      const auto& rows = world.metrics();
      for (std::size_t w = 0; w + kDensityWindow <= rows.size(); w += kDensityWindow) {
        double sum = 0;
        for (std::size_t k = w; k < w + kDensityWindow; ++k) {
          sum += rows[k].density;
          r.worst_tick_deviation = std::max(r.worst_tick_deviation, std::abs(rows[k].density - r.density));
        }
        r.window_density.push_back(sum / kDensityWindow);
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
#pragma omp critical
    {
      ++finished;
      std::cerr << "  [7/8/10] " << finished << "/" << n << " runs (" << r.density << ", " << to_string(r.mode)
                << ", seed " << r.seed << ": " << r.throughput << " tasks/min), " << seconds_since(t0) << " s\n";
    }
  }
  runs.insert(runs.end(), todo.begin(), todo.end());
  return runs;
}

struct Group {
  double mean = 0;
  int n = 0;
  int errors = 0;
};

Group group(const std::vector<ReproRun>& runs, double density, AllocatorMode mode) {
  Group g;
  std::vector<double> v;
  for (const ReproRun& r : runs)
    if (r.density == density && r.mode == mode) {
      if (!r.error.empty()) {
        ++g.errors;
        continue;
      }
      v.push_back(r.throughput);
    }
  g.n = static_cast<int>(v.size());
  g.mean = summarize(v).mean;
  return g;
}

Outcome baseline_gain() {
  const auto& runs = repro_runs(false);
  const Group m_hi = group(runs, kHighDensity, AllocatorMode::Base);
  const Group b_hi = group(runs, kHighDensity, AllocatorMode::OneToOneBaseline);
  const Group m_lo = group(runs, kLowDensity, AllocatorMode::Base);
  const Group b_lo = group(runs, kLowDensity, AllocatorMode::OneToOneBaseline);
  const int errors = m_hi.errors + b_hi.errors + m_lo.errors + b_lo.errors;
  const double gain_hi = m_hi.mean / b_hi.mean - 1.0;
  const double gain_lo = m_lo.mean / b_lo.mean - 1.0;
  const bool pass = errors == 0 && gain_hi >= kHighDensityGain && gain_lo >= -kLowDensitySlack;
  return {pass, fmt("90%%: m2m %.2f vs baseline %.2f tasks/min (%+.1f%%, need >= +%.0f%%); "
                    "30%%: m2m %.2f vs baseline %.2f (%+.1f%%, need >= -%.0f%%); %d x %d steps per cell, %d errors",
                    m_hi.mean, b_hi.mean, 100 * gain_hi, 100 * kHighDensityGain, m_lo.mean, b_lo.mean, 100 * gain_lo,
                    100 * kLowDensitySlack, kReproSeeds, kReproHorizon, errors)};
}

Outcome wsku_parity() {
  const auto& runs = repro_runs(true);
  const Group m = group(runs, kLowDensity, AllocatorMode::Base);
  const Group w = group(runs, kLowDensity, AllocatorMode::WSku);
  const double gap = m.mean / w.mean - 1.0;
  return {m.errors + w.errors == 0 && m.mean >= (1.0 - kWSkuSlack) * w.mean,
          fmt("30%%: m2m %.2f vs m2m-wsku %.2f tasks/min (%+.2f%%, need >= -%.0f%%); %d errors", m.mean, w.mean,
              100 * gap, 100 * kWSkuSlack, m.errors + w.errors)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "m2m_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0, differing = 0;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const char* name : {"restricted", "open_top", "open"})
    for (AllocatorMode mode : {AllocatorMode::Base, AllocatorMode::WSku, AllocatorMode::OneToOneBaseline}) {
      const auto& [map, oracle] = g_maps.get(name);
      SimConfig cfg;
      cfg.map = name;
      cfg.mode = mode;
      cfg.seed = 11;
      cfg.horizon = kDeterminismHorizon;
      run_simulation(cfg, map, oracle, RunOutputs{root / "a" / name / std::string(to_string(mode))});
      run_simulation(cfg, map, oracle, RunOutputs{root / "b" / name / std::string(to_string(mode))});
      for (const char* file : {"metrics.csv", "events.csv"}) {
        const std::string a = slurp(root / "a" / name / std::string(to_string(mode)) / file);
        const std::string b = slurp(root / "b" / name / std::string(to_string(mode)) / file);
        ++compared;
        if (a.empty() || a != b) ++differing;
      }
    }
  fs::remove_all(root);
  return {differing == 0, fmt("%d file pairs (metrics.csv, events.csv; 3 maps x 3 modes x %d steps), %d differ",
                              compared, kDeterminismHorizon, differing)};
}

Outcome density_control() {
  const auto& runs = repro_runs(false);
  double worst_window = 0, worst_tick = 0;
  int windows = 0, outside = 0, errors = 0;
  for (const ReproRun& r : runs) {
    if (r.mode == AllocatorMode::WSku) continue;
    if (!r.error.empty()) {
      ++errors;
      continue;
    }
    worst_tick = std::max(worst_tick, r.worst_tick_deviation);
    for (double w : r.window_density) {
      ++windows;
      const double dev = std::abs(w - r.density);
      worst_window = std::max(worst_window, dev);
      if (dev > kDensityBand) ++outside;
    }
  }
  return {errors == 0 && outside == 0 && windows > 0,
          fmt("%d windows of %d steps, %d outside +/-%.0f points; worst window-mean deviation %.2f points, worst "
              "single-step deviation %.2f points",
              windows, kDensityWindow, outside, 100 * kDensityBand, 100 * worst_window, 100 * worst_tick)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"greedy matches brute-force tensor", greedy_equivalence}},
      {2, {"LNS monotone and effective", lns_efficacy}},
      {3, {"Metropolis calibration", metropolis}},
      {4, {"collision safety", collision_safety}},
      {5, {"KD-tree exactness", kd_exactness}},
      {6, {"greedy scalability", scalability}},
      {7, {"M2M vs one-to-one baseline", baseline_gain}},
      {8, {"M2M vs M2M-wSKU", wsku_parity}},
      {9, {"determinism", determinism}},
      {10, {"inventory density control", density_control}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (!criteria.count(k)) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 2;
    }
    selected.insert(k);
  }
  if (selected.empty())
    for (const auto& [k, _] : criteria) selected.insert(k);

  int failed = 0;
  for (int k : selected) {
    const auto& [name, fn] = criteria.at(k);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << k << " (" << name << "): " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << std::endl;
  }
  return failed ? 1 : 0;
}
