#include "m2m/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>

#include "m2m/config.hpp"

namespace m2m {

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1));
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  struct Loaded {
    GridMap map;
    DistanceOracle oracle;
  };
  std::map<std::string, std::unique_ptr<Loaded>> worlds;
  for (const std::string& name : plan.maps) {
    if (worlds.count(name)) continue;
    GridMap map = load_map(resolve_map_path(name));
    DistanceOracle oracle = build_distance_oracle(map, ExecPolicy::Parallel);
    worlds.emplace(name, std::make_unique<Loaded>(Loaded{std::move(map), std::move(oracle)}));
  }

  ExperimentResult result;
  for (const std::string& name : plan.maps)
    for (double density : plan.densities)
      for (AllocatorMode mode : plan.modes)
        for (std::uint64_t seed : plan.seeds) {
          RunRecord rec;
          rec.config = plan.base;
          rec.config.map = name;
          rec.config.density = density;
          rec.config.mode = mode;
          rec.config.seed = seed;
          result.runs.push_back(std::move(rec));
        }

  const long count = static_cast<long>(result.runs.size());
#pragma omp parallel for schedule(dynamic, 1) if (plan.parallel)
  for (long i = 0; i < count; ++i) {
    RunRecord& rec = result.runs[i];
    try {
      const Loaded& w = *worlds.at(rec.config.map);
      RunOutputs out;
      if (plan.output_root) out.dir = *plan.output_root / run_directory_name(rec.config);
      rec.summary = run_simulation(rec.config, w.map, w.oracle, out);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  std::size_t k = 0;
  for (const std::string& name : plan.maps)
    for (double density : plan.densities)
      for (AllocatorMode mode : plan.modes) {
        SummaryRow row;
        row.map = name;
        row.density = density;
        row.mode = mode;
        std::vector<double> tp;
        double alloc = 0.0;
        for (std::size_t s = 0; s < plan.seeds.size(); ++s, ++k) {
          const RunRecord& rec = result.runs[k];
          if (!rec.summary) {
            ++row.failed;
            continue;
          }
          tp.push_back(rec.summary->throughput);
          alloc += rec.summary->mean_alloc_ms;
        }
        row.runs = static_cast<int>(tp.size());
        row.throughput = summarize(tp);
        row.mean_alloc_ms = tp.empty() ? 0.0 : alloc / tp.size();
        result.failures += row.failed;
        result.rows.push_back(row);
      }
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "map,density,mode,runs,failed,mean_throughput,median_throughput,std_throughput,mean_alloc_ms\n";
  for (const SummaryRow& r : rows)
    out << r.map << ',' << r.density << ',' << to_string(r.mode) << ',' << r.runs << ',' << r.failed << ','
        << r.throughput.mean << ',' << r.throughput.median << ',' << r.throughput.stddev << ',' << r.mean_alloc_ms
        << '\n';
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "map,density,mode,seed,run_dir,throughput,completed,released,mean_alloc_ms,error\n";
  for (const RunRecord& r : runs) {
    out << r.config.map << ',' << r.config.density << ',' << to_string(r.config.mode) << ',' << r.config.seed << ','
        << run_directory_name(r.config) << ',';
    if (r.summary)
      out << r.summary->throughput << ',' << r.summary->completed << ',' << r.summary->released << ','
          << r.summary->mean_alloc_ms << ',';
    else
      out << ",,,,";
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
}

std::vector<BenchSize> default_bench_ladder() {
  std::vector<BenchSize> out;
  for (int k = 50; k <= 150; k += 20) out.push_back({k, k});
  return out;
}

BenchInstance make_bench_instance(const GridMap& map, BenchSize size, double density, int num_skus,
                                  std::mt19937_64& rng) {
  BenchInstance inst{initialize_inventory(map, density, num_skus, rng), {}, {}};
  std::vector<int> cells;
  for (int c = 0; c < map.cell_count(); ++c)
    if (map.traversable(c)) cells.push_back(c);
  if (static_cast<int>(cells.size()) < size.agents) throw std::invalid_argument("bench: more agents than cells");
  std::shuffle(cells.begin(), cells.end(), rng);
  for (int a = 0; a < size.agents; ++a) inst.agents.push_back(map.vertex(cells[a]));

  const std::vector<SkuId> stocked = inst.inventory.stocked_skus();
  std::bernoulli_distribution inbound(0.5);
  for (int n = 0; n < size.tasks; ++n) {
    Task task;
    task.id = n;
    const bool in = stocked.empty() || (inbound(rng) && !inst.inventory.empty_storage().empty());
    task.kind = in ? TaskKind::Inbound : TaskKind::Outbound;
    task.sku = in ? std::uniform_int_distribution<SkuId>(0, num_skus - 1)(rng)
                  : stocked[std::uniform_int_distribution<std::size_t>(0, stocked.size() - 1)(rng)];
    bind_candidates(task, inst.inventory, map);
    inst.tasks.push_back(std::move(task));
  }
  return inst;
}

std::vector<BenchRow> bench_initial_allocation(const GridMap& map, const DistanceOracle& oracle,
                                               std::span<const BenchSize> sizes, int repeats, std::uint64_t seed,
                                               ExecPolicy policy, double density, int num_skus) {
  if (repeats < 1) throw std::invalid_argument("bench: repeats must be positive");
  std::vector<BenchRow> rows;
  std::mt19937_64 rng(seed);
  for (const BenchSize& size : sizes) {
    std::vector<double> secs;
    double allocated = 0.0;
    for (int r = 0; r < repeats; ++r) {
      BenchInstance inst = make_bench_instance(map, size, density, num_skus, rng);
      AllocationInput input;
      input.agent_locations = inst.agents;
      for (const Task& t : inst.tasks)
        if (t.bound()) input.free_tasks.push_back(&t);
      const CostParams params;
      CostMatrices mats = build_matrices(input, map, oracle, nullptr, params);
      Allocation alloc(size.agents);
      const auto began = std::chrono::steady_clock::now();
      greedy_allocate(mats, alloc, params, policy);
      secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count());
      allocated += alloc.task_count();
    }
    const SummaryStats s = summarize(secs);
    rows.push_back({size.agents, size.tasks, repeats, s.mean, s.stddev, allocated / repeats});
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "agents,tasks,repeats,mean_s,std_s,mean_allocated\n";
  for (const BenchRow& r : rows)
    out << r.agents << ',' << r.tasks << ',' << r.repeats << ',' << r.mean_s << ',' << r.std_s << ','
        << r.mean_allocated << '\n';
}

}  // namespace m2m
