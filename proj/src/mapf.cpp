#include "m2m/mapf.hpp"

#include <algorithm>
#include <climits>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace m2m {

namespace {

int at(const TimedPath& p, int t) { return p[std::min<std::size_t>(t, p.size() - 1)]; }

}  // namespace

std::optional<Conflict> detect_collision(const TimedPath& a, const TimedPath& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("detect_collision: empty path");
  const int last = static_cast<int>(std::max(a.size(), b.size())) - 1;
  for (int t = 0; t <= last; ++t) {
    if (at(a, t) == at(b, t)) return Conflict{ConflictType::Vertex, t, at(a, t), at(a, t)};
    if (t < last && at(a, t) == at(b, t + 1) && at(a, t + 1) == at(b, t) && at(a, t) != at(a, t + 1))
      return Conflict{ConflictType::Edge, t, at(a, t), at(a, t + 1)};
  }
  return std::nullopt;
}

std::optional<AgentConflict> first_conflict(std::span<const TimedPath> paths) {
  std::optional<AgentConflict> best;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      auto c = detect_collision(paths[i], paths[j]);
      if (!c) continue;
      // Pairs are visited in (i, j) order, so only a strictly earlier time or a
      // vertex conflict at the same time (reported first in a pair) wins.
      const bool earlier =
          !best || c->time < best->conflict.time ||
          (c->time == best->conflict.time && c->type == ConflictType::Vertex &&
           best->conflict.type == ConflictType::Edge);
      if (earlier) best = AgentConflict{static_cast<int>(i), static_cast<int>(j), *c};
    }
  }
  return best;
}

bool path_follows_grid(const TimedPath& path, const GridMap& map) {
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] < 0 || path[k] >= map.cell_count() || !map.traversable(path[k])) return false;
    if (k > 0 && l1_distance(map.vertex(path[k - 1]), map.vertex(path[k])) > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Space-time A*

namespace {

constexpr int kNever = INT_MAX;

struct Reservations {
  std::uint64_t cells = 0;
  std::unordered_set<std::uint64_t> vertex;
  std::unordered_set<std::uint64_t> edge;
  std::vector<int> parked_since;
  std::vector<int> last_visit;
  int static_after = 0;

  std::uint64_t vkey(int t, int cell) const { return static_cast<std::uint64_t>(t) * cells + cell; }
  std::uint64_t ekey(int t, int from, int to) const { return (vkey(t, from)) * cells + to; }

  Reservations(int cell_count, std::span<const TimedPath* const> paths)
      : cells(cell_count), parked_since(cell_count, kNever), last_visit(cell_count, -1) {
    for (const TimedPath* p : paths) {
      const int len = static_cast<int>(p->size());
      for (int t = 0; t + 1 < len; ++t) {
        vertex.insert(vkey(t, (*p)[t]));
        last_visit[(*p)[t]] = std::max(last_visit[(*p)[t]], t);
        if ((*p)[t] != (*p)[t + 1]) edge.insert(ekey(t, (*p)[t], (*p)[t + 1]));
      }
      parked_since[p->back()] = std::min(parked_since[p->back()], len - 1);
      static_after = std::max(static_after, len - 1);
    }
  }

  bool can_occupy(int cell, int t) const { return parked_since[cell] > t && !vertex.count(vkey(t, cell)); }
  bool can_move(int from, int to, int t) const {
    if (!can_occupy(to, t + 1)) return false;
    return from == to || !edge.count(ekey(t, to, from));
  }
  // The agent may stop at `cell` from time t on without ever being disturbed.
  bool can_rest(int cell, int t) const { return parked_since[cell] == kNever && last_visit[cell] < t; }
};

struct SearchNode {
  int cell;
  int t;
  int parent;
};

}  // namespace

LowLevelPlanner::LowLevelPlanner(const GridMap& map, const DistanceOracle& oracle) : map_(&map), oracle_(&oracle) {}

const std::vector<int>& LowLevelPlanner::goal_distances(int goal) const {
  auto it = bfs_cache_.find(goal);
  if (it != bfs_cache_.end()) return it->second;
  if (bfs_cache_.size() > 512) bfs_cache_.clear();
  return bfs_cache_.emplace(goal, bfs_distances(*map_, goal)).first->second;
}

int LowLevelPlanner::heuristic(int goal, int cell) const {
  if (oracle_->is_source(goal)) return oracle_->row(goal)[cell];
  return goal_distances(goal)[cell];
}

std::optional<TimedPath> LowLevelPlanner::plan(int start, int goal, std::span<const TimedPath* const> constraints,
                                               GoalMode mode, int horizon) const {
  if (!map_->traversable(start) || !map_->traversable(goal)) throw std::invalid_argument("plan: blocked endpoint");
  const Reservations res(map_->cell_count(), constraints);
  if (!res.can_occupy(start, 0)) return std::nullopt;

  const std::uint16_t* goal_row = oracle_->is_source(goal) ? oracle_->row(goal) : nullptr;
  const std::vector<int>* goal_bfs = goal_row ? nullptr : &goal_distances(goal);
  auto h = [&](int cell) { return goal_row ? static_cast<int>(goal_row[cell]) : (*goal_bfs)[cell]; };

  const int collapse = res.static_after;
  const std::uint64_t layers = static_cast<std::uint64_t>(collapse) + 1;
  std::unordered_set<std::uint64_t> closed;
  std::vector<SearchNode> nodes;
  // (f, -t, cell, node index): prefer deeper nodes among equal f.
  using Entry = std::tuple<int, int, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  nodes.push_back({start, 0, -1});
  open.emplace(h(start), 0, start, 0);

  int best_rest = -1;
  std::tuple<int, int, int> best_rest_key{INT_MAX, INT_MAX, INT_MAX};
  int found = -1;
  std::array<int, 4> nbrs{};

  while (!open.empty()) {
    const int idx = std::get<3>(open.top());
    open.pop();
    const SearchNode cur = nodes[idx];
    const std::uint64_t key = static_cast<std::uint64_t>(cur.cell) * layers + std::min(cur.t, collapse);
    if (!closed.insert(key).second) continue;

    if (res.can_rest(cur.cell, cur.t)) {
      if (cur.cell == goal) {
        found = idx;
        break;
      }
      if (mode == GoalMode::BestEffort) {
        std::tuple<int, int, int> k{h(cur.cell), cur.t, cur.cell};
        if (k < best_rest_key) {
          best_rest_key = k;
          best_rest = idx;
        }
      }
    }
    if (cur.t >= horizon) continue;

    const int n = map_->neighbors(cur.cell, nbrs);
    auto expand = [&](int next) {
      if (!res.can_move(cur.cell, next, cur.t)) return;
      const std::uint64_t nkey = static_cast<std::uint64_t>(next) * layers + std::min(cur.t + 1, collapse);
      if (closed.count(nkey)) return;
      nodes.push_back({next, cur.t + 1, idx});
      open.emplace(cur.t + 1 + h(next), -(cur.t + 1), next, static_cast<int>(nodes.size()) - 1);
    };
    expand(cur.cell);
    for (int k = 0; k < n; ++k) expand(nbrs[k]);
  }

  if (found < 0) found = best_rest;
  if (found < 0) return std::nullopt;
  TimedPath path(nodes[found].t + 1);
  for (int i = found; i >= 0; i = nodes[i].parent) path[nodes[i].t] = nodes[i].cell;
  return path;
}

std::vector<Vertex> segment_goals(const Allocation& alloc, std::span<const Vertex> locations) {
  if (static_cast<int>(locations.size()) != alloc.agent_count())
    throw std::invalid_argument("segment_goals: one location per agent expected");
  std::vector<Vertex> goals(locations.begin(), locations.end());
  for (int m = 0; m < alloc.agent_count(); ++m) {
    const auto& seq = alloc.sequences[m];
    if (seq.empty()) continue;
    goals[m] = seq.front().picked_up ? seq.front().dest : seq.front().start;
  }
  return goals;
}

void write_paths_csv(std::ostream& out, std::span<const TimedPath> paths, const GridMap& map, int t0) {
  out << "agent,t,x,y\n";
  for (std::size_t a = 0; a < paths.size(); ++a) {
    for (std::size_t k = 0; k < paths[a].size(); ++k) {
      const Vertex v = map.vertex(paths[a][k]);
      out << a << ',' << t0 + static_cast<int>(k) << ',' << v.x << ',' << v.y << '\n';
    }
  }
}

Trajectories read_paths_csv(std::istream& in) {
  Trajectories traj;
  std::string line;
  if (!std::getline(in, line)) return traj;
  if (line.rfind("agent,t,x,y", 0) != 0) throw std::runtime_error("path CSV: expected header agent,t,x,y");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    int agent, t, x, y;
    char c1, c2, c3;
    if (!(row >> agent >> c1 >> t >> c2 >> x >> c3 >> y) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("path CSV: malformed line " + std::to_string(lineno));
    traj[agent].emplace_back(t, Vertex{x, y});
  }
  for (auto& [agent, samples] : traj) std::sort(samples.begin(), samples.end());
  return traj;
}

std::vector<ReplayIssue> replay_check(const Trajectories& traj, const GridMap* map) {
  std::vector<ReplayIssue> issues;
  std::map<int, std::map<int, Vertex>> by_time;  // t -> agent -> cell
  for (const auto& [agent, samples] : traj) {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto [t, v] = samples[k];
      by_time[t][agent] = v;
      if (map && !map->traversable(v)) issues.push_back({"obstacle", t, agent, -1, v});
      if (k == 0) continue;
      const auto [pt, pv] = samples[k - 1];
      if (t != pt + 1) issues.push_back({"gap", t, agent, -1, v});
      else if (l1_distance(pv, v) > 1) issues.push_back({"jump", t, agent, -1, v});
    }
  }
  for (auto it = by_time.begin(); it != by_time.end(); ++it) {
    const auto& now = it->second;
    std::map<Vertex, int> seen;
    for (const auto& [agent, v] : now) {
      auto [pos, inserted] = seen.emplace(v, agent);
      if (!inserted) issues.push_back({"vertex", it->first, pos->second, agent, v});
    }
    auto next = std::next(it);
    if (next == by_time.end() || next->first != it->first + 1) continue;
    for (const auto& [a, va] : now) {
      auto na = next->second.find(a);
      if (na == next->second.end() || na->second == va) continue;
      // Does somebody move from na->second into va at the same step?
      auto other = seen.find(na->second);
      if (other == seen.end() || other->second <= a) continue;
      auto nb = next->second.find(other->second);
      if (nb != next->second.end() && nb->second == va)
        issues.push_back({"edge", it->first, a, other->second, va});
    }
  }
  return issues;
}

}  // namespace m2m
