#include "m2m/sim.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace m2m {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(splitmix(seed) ^ stream); }

enum Stream : std::uint64_t { kInit = 1, kRelease = 2, kLns = 3, kPlan = 4 };

double ms_since(std::chrono::steady_clock::time_point began) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - began).count();
}

}  // namespace

std::string_view to_string(AllocatorMode mode) {
  switch (mode) {
    case AllocatorMode::Base: return "m2m";
    case AllocatorMode::WSku: return "m2m-wsku";
    case AllocatorMode::OneToOneBaseline: return "baseline";
  }
  return "?";
}

AllocatorMode parse_allocator_mode(std::string_view text) {
  if (text == "m2m" || text == "base") return AllocatorMode::Base;
  if (text == "m2m-wsku" || text == "wsku") return AllocatorMode::WSku;
  if (text == "baseline" || text == "one-to-one") return AllocatorMode::OneToOneBaseline;
  throw std::invalid_argument("unknown allocator mode '" + std::string(text) + "' (m2m, m2m-wsku, baseline)");
}

void SimConfig::validate() const {
  if (agents < 0) throw std::invalid_argument("agents must be non-negative");
  if (num_skus < 1) throw std::invalid_argument("num_skus must be at least 1");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  if (release_rate < 0 || active_cap < 0) throw std::invalid_argument("release rate and active cap must be >= 0");
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  if (!(seconds_per_tick > 0)) throw std::invalid_argument("seconds_per_tick must be positive");
  if (window_ticks < 1) throw std::invalid_argument("window_ticks must be at least 1");
  if (pbs_node_cap < 0) throw std::invalid_argument("pbs_node_cap must be non-negative");
  if (alloc_budget_seconds < 0) throw std::invalid_argument("alloc_budget_seconds must be non-negative");
  if (lns_iterations < 0 && alloc_budget_seconds <= 0)
    throw std::invalid_argument("unbounded LNS iterations need a positive allocation budget");
  if (!(cost.base_weight > 0) || cost.sku_weight < 0) throw std::invalid_argument("cost weights out of range");
  if (cost.max_sequence < 1) throw std::invalid_argument("max_sequence must be at least 1");
  lns.validate();
}

World::World(const SimConfig& config, const GridMap& map, const DistanceOracle& oracle, WorldSetup setup,
             std::ostream* events)
    : config_(config),
      map_(&map),
      oracle_(&oracle),
      planner_(map, oracle),
      release_rng_(stream_seed(config.seed, kRelease)),
      lns_rng_(stream_seed(config.seed, kLns)),
      inv_(map, config.num_skus),
      pool_(ReleasePolicy{config.release_rate, config.active_cap, config.density}),
      log_(events) {
  config_.validate();
  std::mt19937_64 init(stream_seed(config.seed, kInit));
  inv_ = initialize_inventory(map, setup.initial_density.value_or(config.density), config.num_skus, init);

  std::vector<Vertex> starts;
  if (setup.agent_starts) {
    starts = *setup.agent_starts;
    if (static_cast<int>(starts.size()) != config.agents)
      throw std::invalid_argument("agent_starts must list one cell per agent");
    std::set<Vertex> unique(starts.begin(), starts.end());
    if (unique.size() != starts.size()) throw std::invalid_argument("agent_starts must be distinct");
    for (Vertex v : starts)
      if (!map.traversable(v)) throw std::invalid_argument("agent start on a blocked cell");
  } else {
    std::vector<int> cells = map.free_cells();
    std::shuffle(cells.begin(), cells.end(), init);
    if (static_cast<int>(cells.size()) < config.agents) {
      std::vector<int> extra = map.endpoints();
      std::shuffle(extra.begin(), extra.end(), init);
      cells.insert(cells.end(), extra.begin(), extra.end());
    }
    if (static_cast<int>(cells.size()) < config.agents) throw std::invalid_argument("more agents than free cells");
    for (int a = 0; a < config.agents; ++a) starts.push_back(map.vertex(cells[a]));
  }
  for (int a = 0; a < config.agents; ++a) {
    AgentState s;
    s.id = a;
    s.location = starts[a];
    s.path = {map.index(starts[a])};
    s.goal = s.path.front();
    agents_.push_back(std::move(s));
    if (config.record_trajectory) trajectory_[a].emplace_back(0, starts[a]);
  }
  alloc_ = Allocation(config.agents);
}

TaskId World::inject_task(TaskKind kind, SkuId sku) {
  Task& task = pool_.add(kind, sku, t_);
  bind_candidates(task, inv_, *map_);
  log_.record(t_, task, "released");
  return task.id;
}

std::vector<Vertex> World::locations() const {
  std::vector<Vertex> out;
  out.reserve(agents_.size());
  for (const AgentState& a : agents_) out.push_back(a.location);
  return out;
}

void World::step() {
  TickTiming timing;
  timing.t = t_;
  release_tasks(pool_, inv_, *map_, t_, release_rng_, &log_);
  if (pool_.has_free()) allocate(timing);
  plan(timing);
  advance();
  const int done = fire_events();
  ++t_;
  record(done);
  timing_.push_back(timing);
  if (config_.record_trajectory)
    for (const AgentState& a : agents_) trajectory_[a.id].emplace_back(t_, a.location);
}

void World::allocate(TickTiming& timing) {
  const auto began = std::chrono::steady_clock::now();
  timing.allocated = true;

  // Everything but the task each agent is working on goes back to the pool.
  std::set<TaskId> returned;
  for (auto& seq : alloc_.sequences) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      pool_.transition(seq[k].task, TaskState::Free);
      returned.insert(seq[k].task);
    }
    if (!seq.empty()) {
      seq.resize(1);
      seq.front().locked = true;
    }
  }

  std::vector<Task*> bound;
  for (TaskId id : pool_.free_ids()) {
    Task& task = pool_.get(id);
    if (bind_candidates(task, inv_, *map_)) bound.push_back(&task);
  }
  if (config_.mode == AllocatorMode::OneToOneBaseline) {
    convert_one_to_one(bound, alloc_.claimed_starts(), alloc_.claimed_dests(), *map_, *oracle_);
    std::erase_if(bound, [](const Task* t) { return !t->bound(); });
  }

  Allocation next = alloc_;
  if (!bound.empty()) {
    const std::vector<Vertex> locs = locations();
    CostParams cost = config_.cost;
    cost.mode = config_.mode == AllocatorMode::WSku ? CostMode::WSku : CostMode::Base;
    const Inventory* inv = cost.mode == CostMode::WSku ? &inv_ : nullptr;

    AllocationInput input;
    input.agent_locations = locs;
    input.kept = &alloc_;
    input.free_tasks.assign(bound.begin(), bound.end());
    CostMatrices mats = build_matrices(input, *map_, *oracle_, inv, cost);
    greedy_allocate(mats, next, cost);

    LnsBudget budget;
    if (config_.lns_iterations >= 0) budget.max_iterations = config_.lns_iterations;
    if (config_.alloc_budget_seconds > 0)
      budget.seconds = std::max(0.0, config_.alloc_budget_seconds - ms_since(began) / 1000.0);
    if (config_.lns_iterations != 0) {
      LnsContext ctx{locs, map_, oracle_, inv, cost, ExecPolicy::Serial};
      LnsResult r = lns_improve(next, mats, ctx, config_.lns, budget, lns_rng_);
      next = std::move(r.best);
      timing.lns_iterations = r.iterations;
    }
  }

  std::set<TaskId> now_allocated;
  for (const auto& seq : next.sequences)
    for (const Assignment& a : seq)
      if (!a.locked) {
        pool_.transition(a.task, TaskState::Allocated);
        now_allocated.insert(a.task);
      }
  for (TaskId id : now_allocated)
    if (!returned.count(id)) log_.record(t_, pool_.get(id), "allocated");
  for (TaskId id : returned)
    if (!now_allocated.count(id)) log_.record(t_, pool_.get(id), "freed");
  alloc_ = std::move(next);
  timing.alloc_ms = ms_since(began);
}

void World::plan(TickTiming& timing) {
  const int n = static_cast<int>(agents_.size());
  std::vector<int> goals(n);
  std::vector<char> replan(n, 0);
  bool any = false;
  for (int a = 0; a < n; ++a) {
    const AgentState& ag = agents_[a];
    const auto& seq = alloc_.sequences[a];
    if (seq.empty())
      goals[a] = ag.path.back();  // free: hold position, or finish a dodge
    else
      goals[a] = map_->index(seq.front().picked_up ? seq.front().dest : seq.front().start);
    replan[a] = goals[a] != ag.goal || ag.path.back() != goals[a] || ag.stalled;
    any = any || replan[a];
  }
  if (!any) return;

  const auto began = std::chrono::steady_clock::now();
  std::vector<PbsAgent> request(n);
  for (int a = 0; a < n; ++a) {
    request[a].start = agents_[a].path.front();
    request[a].goal = goals[a];
    request[a].mode = GoalMode::BestEffort;
    request[a].flexible = alloc_.sequences[a].empty();
    request[a].kept = replan[a] ? nullptr : &agents_[a].path;
  }
  PbsParams params;
  params.node_cap = config_.pbs_node_cap;
  params.fallback_seed = stream_seed(config_.seed ^ static_cast<std::uint64_t>(t_), kPlan);
  PbsResult result = pbs_solve(request, planner_, params);
  if (auto c = first_conflict(result.paths))
    throw std::logic_error("planner returned colliding paths for agents " + std::to_string(c->first) + " and " +
                           std::to_string(c->second) + " at t+" + std::to_string(c->conflict.time));
  for (int a = 0; a < n; ++a) {
    agents_[a].path = std::move(result.paths[a]);
    agents_[a].goal = goals[a];
    agents_[a].stalled = result.stalled[a] != 0;
  }
  timing.pbs_fallback = result.fallback;
  timing.plan_ms = ms_since(began);
}

void World::advance() {
  std::unordered_map<int, int> occupant_now;
  std::unordered_map<int, int> occupant_next;
  std::vector<int> next(agents_.size());
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const TimedPath& p = agents_[a].path;
    next[a] = p.size() > 1 ? p[1] : p[0];
    occupant_now.emplace(p[0], static_cast<int>(a));
  }
  auto fail = [&](std::string_view kind, std::size_t a, int b) {
    throw std::logic_error(std::string(kind) + " collision between agents " + std::to_string(a) + " and " +
                           std::to_string(b) + " at t=" + std::to_string(t_ + 1));
  };
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    auto [it, inserted] = occupant_next.emplace(next[a], static_cast<int>(a));
    if (!inserted) fail("vertex", it->second, static_cast<int>(a));
    const int here = agents_[a].path[0];
    if (next[a] == here) continue;
    auto other = occupant_now.find(next[a]);
    if (other != occupant_now.end() && next[other->second] == here) fail("edge", a, other->second);
  }
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    AgentState& ag = agents_[a];
    if (ag.path.size() > 1) ag.path.erase(ag.path.begin());
    ag.location = map_->vertex(ag.path.front());
  }
}

int World::fire_events() {
  int done = 0;
  for (AgentState& ag : agents_) {
    auto& seq = alloc_.sequences[ag.id];
    while (!seq.empty()) {
      Assignment& cur = seq.front();
      if (!cur.picked_up && ag.location == cur.start) {
        pickup_task(pool_, cur.task, inv_, cur.start, t_ + 1, &log_);
        cur.picked_up = true;
        ag.carrying = cur.task;
        ++picked_up_;
        continue;
      }
      if (cur.picked_up && ag.location == cur.dest) {
        complete_task(pool_, cur.task, inv_, cur.dest, t_ + 1, &log_);
        ag.carrying.reset();
        seq.erase(seq.begin());
        ++done;
        continue;
      }
      break;
    }
  }
  return done;
}

void World::record(int completions) {
  completions_.push_back(completions);
  window_sum_ += completions;
  const int w = config_.window_ticks;
  if (static_cast<int>(completions_.size()) > w) window_sum_ -= completions_[completions_.size() - 1 - w];
  MetricsRow row;
  row.t = t_;
  row.window_completions = window_sum_;
  const double minutes = std::min(t_, w) * config_.seconds_per_tick / 60.0;
  row.throughput = window_sum_ / minutes;
  row.cumulative = pool_.completed();
  row.density = inv_.density();
  metrics_.push_back(row);
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "t,window_completions,throughput,cumulative,density\n";
  for (const MetricsRow& r : rows)
    out << r.t << ',' << r.window_completions << ',' << r.throughput << ',' << r.cumulative << ',' << r.density
        << '\n';
}

void write_timing_csv(std::ostream& out, const std::vector<TickTiming>& rows) {
  out << "t,allocated,alloc_ms,plan_ms,lns_iterations,pbs_fallback\n";
  for (const TickTiming& r : rows)
    out << r.t << ',' << (r.allocated ? 1 : 0) << ',' << r.alloc_ms << ',' << r.plan_ms << ',' << r.lns_iterations
        << ',' << (r.pbs_fallback ? 1 : 0) << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectories& traj) {
  out << "agent,t,x,y\n";
  for (const auto& [agent, samples] : traj)
    for (const auto& [t, v] : samples) out << agent << ',' << t << ',' << v.x << ',' << v.y << '\n';
}

RunSummary run_simulation(const SimConfig& config, const GridMap& map, const DistanceOracle& oracle,
                          const RunOutputs& outputs) {
  std::ofstream events;
  if (outputs.dir) {
    std::filesystem::create_directories(*outputs.dir);
    events.open(*outputs.dir / "events.csv");
    if (!events) throw std::runtime_error("cannot write " + (*outputs.dir / "events.csv").string());
  }
  World world(config, map, oracle, {}, outputs.dir ? &events : nullptr);
  for (int t = 0; t < config.horizon; ++t) world.step();

  RunSummary s;
  s.seed = config.seed;
  s.horizon = config.horizon;
  s.released = world.pool().released();
  s.completed = world.completed();
  s.throughput = config.horizon > 0 ? s.completed / (config.horizon * config.seconds_per_tick / 60.0) : 0.0;
  int rounds = 0;
  for (const TickTiming& tt : world.timing()) {
    if (tt.pbs_fallback) ++s.fallbacks;
    if (!tt.allocated) continue;
    ++rounds;
    s.mean_alloc_ms += tt.alloc_ms;
    s.max_alloc_ms = std::max(s.max_alloc_ms, tt.alloc_ms);
  }
  if (rounds > 0) s.mean_alloc_ms /= rounds;

  if (outputs.dir) {
    std::ofstream metrics(*outputs.dir / "metrics.csv");
    write_metrics_csv(metrics, world.metrics());
    std::ofstream timing(*outputs.dir / "timing.csv");
    write_timing_csv(timing, world.timing());
    if (config.record_trajectory) {
      std::ofstream traj(*outputs.dir / "trajectory.csv");
      write_trajectory_csv(traj, world.trajectory());
    }
  }
  return s;
}

RunSummary run_simulation(const SimConfig& config, const RunOutputs& outputs) {
  const GridMap map = load_map(resolve_map_path(config.map));
  const DistanceOracle oracle = build_distance_oracle(map);
  return run_simulation(config, map, oracle, outputs);
}

}  // namespace m2m
