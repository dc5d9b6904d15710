// Command-line front end: run, experiment, bench-alloc, validate, dump-map.
// Every subcommand writes CSV to stdout; diagnostics go to stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "m2m/config.hpp"
#include "m2m/harness.hpp"
#include "m2m/mapf.hpp"
#include "m2m/sim.hpp"

namespace fs = std::filesystem;
using namespace m2m;

namespace {

struct CommonFlags {
  std::string config_file;
  std::vector<std::string> sets;  // key=value
  std::optional<std::string> map;
  std::optional<double> density;
  std::optional<std::string> mode;
  std::optional<int> horizon;
  std::optional<int> agents;
  std::optional<int> lns_iterations;
  std::optional<double> budget;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_file, "key = value config file");
  cmd->add_option("--set", f.sets, "override any config key (key=value), repeatable");
  cmd->add_option("--horizon", f.horizon, "timesteps per run");
  cmd->add_option("--agents", f.agents, "number of agents");
  cmd->add_option("--lns-iterations", f.lns_iterations, "LNS iterations per round (negative: unbounded)");
  cmd->add_option("--budget", f.budget, "wall-clock seconds per allocation round (0: none)");
}

// Returns keys from the file that are not SimConfig fields (experiment lists).
std::map<std::string, std::string> build_config(const CommonFlags& f, SimConfig& cfg) {
  std::map<std::string, std::string> rest;
  if (!f.config_file.empty()) rest = apply_settings(cfg, load_key_values(f.config_file));
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.map) cfg.map = *f.map;
  if (f.density) cfg.density = *f.density;
  if (f.mode) cfg.mode = parse_allocator_mode(*f.mode);
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.agents) cfg.agents = *f.agents;
  if (f.lns_iterations) cfg.lns_iterations = *f.lns_iterations;
  if (f.budget) cfg.alloc_budget_seconds = *f.budget;
  cfg.validate();
  return rest;
}

int cmd_run(const CommonFlags& f, std::uint64_t seed, const std::string& out_root, bool trajectory) {
  SimConfig cfg;
  cfg.seed = seed;
  build_config(f, cfg);
  if (trajectory) cfg.record_trajectory = true;
  RunOutputs out;
  if (!out_root.empty()) out.dir = fs::path(out_root) / run_directory_name(cfg);
  const RunSummary s = run_simulation(cfg, out);
  std::cout << "map,density,mode,seed,horizon,released,completed,throughput,mean_alloc_ms,max_alloc_ms,fallbacks,"
               "run_dir\n"
            << cfg.map << ',' << cfg.density << ',' << to_string(cfg.mode) << ',' << s.seed << ',' << s.horizon
            << ',' << s.released << ',' << s.completed << ',' << s.throughput << ',' << s.mean_alloc_ms << ','
            << s.max_alloc_ms << ',' << s.fallbacks << ',' << (out.dir ? out.dir->string() : "") << '\n';
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const std::uint64_t lo = std::stoull(item.substr(0, dash));
      const std::uint64_t hi = std::stoull(item.substr(dash + 1));
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(std::stoull(item));
    }
  }
  return out;
}

int cmd_experiment(const CommonFlags& f, std::string maps, std::string densities, std::string modes,
                   std::string seeds, const std::string& out_root, bool serial) {
  ExperimentPlan plan;
  const auto rest = build_config(f, plan.base);
  auto pick = [&rest](std::string& value, const char* key, const char* fallback) {
    if (!value.empty()) return;
    auto it = rest.find(key);
    value = it != rest.end() ? it->second : fallback;
  };
  pick(maps, "maps", plan.base.map.c_str());
  pick(densities, "densities", "");
  pick(modes, "modes", "m2m,m2m-wsku,baseline");
  pick(seeds, "seeds", "1-10");
  for (const auto& [key, value] : rest)
    if (key != "maps" && key != "densities" && key != "modes" && key != "seeds")
      throw ConfigError("unknown config key '" + key + "'");

  plan.maps = split_list(maps);
  for (const std::string& d : split_list(densities)) plan.densities.push_back(std::stod(d));
  if (plan.densities.empty()) plan.densities.push_back(plan.base.density);
  for (const std::string& m : split_list(modes)) plan.modes.push_back(parse_allocator_mode(m));
  plan.seeds = parse_seeds(seeds);
  plan.parallel = !serial;
  if (!out_root.empty()) plan.output_root = out_root;

  const ExperimentResult result = run_experiment(plan);
  write_summary_csv(std::cout, result.rows);
  if (plan.output_root) {
    fs::create_directories(*plan.output_root);
    std::ofstream summary(*plan.output_root / "summary.csv");
    write_summary_csv(summary, result.rows);
    std::ofstream runs(*plan.output_root / "runs.csv");
    write_runs_csv(runs, result.runs);
  }
  for (const RunRecord& r : result.runs)
    if (!r.error.empty())
      std::cerr << "run failed (" << r.config.map << ", " << to_string(r.config.mode) << ", seed " << r.config.seed
                << "): " << r.error << '\n';
  return result.failures > 0 ? 1 : 0;
}

int cmd_bench(const std::string& map_name, const std::string& sizes, int repeats, std::uint64_t seed, bool parallel) {
  const GridMap map = load_map(resolve_map_path(map_name));
  const DistanceOracle oracle = build_distance_oracle(map, ExecPolicy::Parallel);
  std::vector<BenchSize> ladder;
  if (sizes.empty()) {
    ladder = default_bench_ladder();
  } else {
    for (const std::string& item : split_list(sizes)) {
      const auto x = item.find('x');
      if (x == std::string::npos)
        ladder.push_back({std::stoi(item), std::stoi(item)});
      else
        ladder.push_back({std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))});
    }
  }
  const auto rows = bench_initial_allocation(map, oracle, ladder, repeats, seed,
                                             parallel ? ExecPolicy::Parallel : ExecPolicy::Serial);
  write_bench_csv(std::cout, rows);
  return 0;
}

int cmd_validate(const std::string& paths_file, const std::string& map_name) {
  std::ifstream in(paths_file);
  if (!in) throw std::runtime_error("cannot open " + paths_file);
  const Trajectories traj = read_paths_csv(in);
  std::optional<GridMap> map;
  if (!map_name.empty()) map.emplace(load_map(resolve_map_path(map_name)));
  const auto issues = replay_check(traj, map ? &*map : nullptr);
  std::cout << "kind,t,first,second,x,y\n";
  for (const ReplayIssue& i : issues)
    std::cout << i.kind << ',' << i.t << ',' << i.first << ',' << i.second << ',' << i.where.x << ',' << i.where.y
              << '\n';
  std::cerr << traj.size() << " agents replayed, " << issues.size() << " issue(s)\n";
  return issues.empty() ? 0 : 1;
}

int cmd_dump_map(const std::string& map_name, bool cells) {
  const GridMap map = load_map(resolve_map_path(map_name));
  if (cells) {
    std::cout << "x,y,kind\n";
    for (int c = 0; c < map.cell_count(); ++c) {
      const char* kind = "free";
      switch (map.kind_at(c)) {
        case CellKind::Free: kind = "free"; break;
        case CellKind::Obstacle: kind = "obstacle"; break;
        case CellKind::StorageEndpoint: kind = "storage"; break;
        case CellKind::LoadingEndpoint: kind = "loading"; break;
      }
      const Vertex v = map.vertex(c);
      std::cout << v.x << ',' << v.y << ',' << kind << '\n';
    }
    return 0;
  }
  std::cout << "map,width,height,traversable,storage,loading,free\n"
            << map_name << ',' << map.width() << ',' << map.height() << ',' << map.traversable_count() << ','
            << map.storage_endpoints().size() << ',' << map.loading_endpoints().size() << ','
            << map.free_cells().size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-to-many multi-agent pickup and delivery simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::uint64_t run_seed = 1;
  std::string run_out;
  bool run_traj = false;
  auto* run = app.add_subcommand("run", "single simulation");
  add_common(run, run_flags);
  run->add_option("--map", run_flags.map, "map asset name or file");
  run->add_option("--density", run_flags.density, "target inventory density");
  run->add_option("--mode", run_flags.mode, "m2m, m2m-wsku or baseline");
  run->add_option("--seed", run_seed, "RNG seed");
  run->add_option("-o,--out", run_out, "output root; the run writes to <root>/<hash>-s<seed>/");
  run->add_flag("--trajectory", run_traj, "record executed positions (trajectory.csv)");

  CommonFlags exp_flags;
  std::string exp_maps, exp_densities, exp_modes, exp_seeds, exp_out;
  bool exp_serial = false;
  auto* exp = app.add_subcommand("experiment", "batch over maps x densities x modes x seeds");
  add_common(exp, exp_flags);
  exp->add_option("--map,--maps", exp_maps, "comma-separated maps");
  exp->add_option("--density,--densities", exp_densities, "comma-separated densities");
  exp->add_option("--mode,--modes", exp_modes, "comma-separated modes");
  exp->add_option("--seeds", exp_seeds, "seed list, ranges allowed (1-10)");
  exp->add_option("-o,--out", exp_out, "output root for per-run directories and summary.csv");
  exp->add_flag("--serial", exp_serial, "run worlds one at a time");

  std::string bench_map = "restricted", bench_sizes;
  int bench_repeats = 10;
  std::uint64_t bench_seed = 1;
  bool bench_parallel = false;
  auto* bench = app.add_subcommand("bench-alloc", "greedy allocation timing ladder");
  bench->add_option("--map", bench_map, "map asset name or file");
  bench->add_option("--sizes", bench_sizes, "comma-separated M (M=N) or MxN; default 50,70,...,150");
  bench->add_option("--repeats", bench_repeats, "instances per size");
  bench->add_option("--seed", bench_seed, "RNG seed");
  bench->add_flag("--parallel", bench_parallel, "use the OpenMP scan kernels");

  std::string val_paths, val_map;
  auto* val = app.add_subcommand("validate", "replay an agent,t,x,y dump and report collisions");
  val->add_option("paths", val_paths, "path or trajectory CSV")->required();
  val->add_option("--map", val_map, "map to check moves against");

  std::string dump_map = "restricted";
  bool dump_cells = false;
  auto* dump = app.add_subcommand("dump-map", "describe a map asset");
  dump->add_option("map", dump_map, "map asset name or file");
  dump->add_flag("--cells", dump_cells, "one row per cell");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_flags, run_seed, run_out, run_traj);
    if (*exp) return cmd_experiment(exp_flags, exp_maps, exp_densities, exp_modes, exp_seeds, exp_out, exp_serial);
    if (*bench) return cmd_bench(bench_map, bench_sizes, bench_repeats, bench_seed, bench_parallel);
    if (*val) return cmd_validate(val_paths, val_map);
    if (*dump) return cmd_dump_map(dump_map, dump_cells);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
