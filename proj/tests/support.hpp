#pragma once
// Shared fixtures and independent reference implementations for the tests.
// None of these reuse library internals beyond the public map accessors.

#include <algorithm>
#include <array>
#include <climits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "m2m/grid_map.hpp"
#include "m2m/mapf.hpp"

namespace testing {

using m2m::GridMap;

inline GridMap map_from_rows(const std::vector<std::string>& rows,
                             m2m::MapRequirements req = m2m::MapRequirements::Any) {
  std::string text = "height " + std::to_string(rows.size()) + "\nwidth " + std::to_string(rows.front().size()) +
                     "\nmap\n";
  for (const auto& r : rows) text += r + "\n";
  return m2m::parse_map(text, req);
}

// Random connected map: obstacles sprinkled, then rejected until connected.
inline GridMap random_map(int w, int h, double obstacle_rate, int endpoints, std::mt19937_64& rng) {
  std::bernoulli_distribution block(obstacle_rate);
  for (;;) {
    std::vector<std::string> rows(h, std::string(w, '.'));
    for (auto& r : rows)
      for (char& c : r)
        if (block(rng)) c = '@';
    std::vector<std::pair<int, int>> open;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (rows[y][x] == '.') open.push_back({x, y});
    if (static_cast<int>(open.size()) < endpoints + 4) continue;
    std::shuffle(open.begin(), open.end(), rng);
    for (int i = 0; i < endpoints; ++i) rows[open[i].second][open[i].first] = i % 2 ? 'L' : 'E';
    try {
      return map_from_rows(rows);
    } catch (const m2m::MapError&) {
    }
  }
}

// Dijkstra with unit weights, written against raw cell kinds.
inline std::vector<int> dijkstra(const GridMap& map, int source) {
  std::vector<int> dist(map.cell_count(), INT_MAX);
  using Item = std::pair<int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0;
  pq.push({0, source});
  while (!pq.empty()) {
    auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    const m2m::Vertex v = map.vertex(c);
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const m2m::Vertex u{v.x + dx[k], v.y + dy[k]};
      if (!map.in_bounds(u) || map.kind(u) == m2m::CellKind::Obstacle) continue;
      const int n = map.index(u);
      if (d + 1 < dist[n]) {
        dist[n] = d + 1;
        pq.push({d + 1, n});
      }
    }
  }
  return dist;
}

inline int cell_at(const m2m::TimedPath& p, int t) { return p[std::min<std::size_t>(t, p.size() - 1)]; }

// Collects every vertex and swap conflict over the padded horizon with a
// double loop, then keeps the earliest (vertex before swap at equal time).
inline std::optional<m2m::Conflict> naive_collision(const m2m::TimedPath& a, const m2m::TimedPath& b) {
  const int len = static_cast<int>(std::max(a.size(), b.size()));
  std::vector<m2m::Conflict> all;
  for (int ta = 0; ta < len; ++ta)
    for (int tb = 0; tb < len; ++tb) {
      if (ta == tb && cell_at(a, ta) == cell_at(b, tb))
        all.push_back({m2m::ConflictType::Vertex, ta, cell_at(a, ta), cell_at(a, ta)});
      if (tb == ta + 1 && cell_at(a, ta) != cell_at(a, ta + 1) && cell_at(a, ta) == cell_at(b, tb) &&
          cell_at(a, ta + 1) == cell_at(b, ta))
        all.push_back({m2m::ConflictType::Edge, ta, cell_at(a, ta), cell_at(a, ta + 1)});
    }
  if (all.empty()) return std::nullopt;
  return *std::min_element(all.begin(), all.end(), [](const m2m::Conflict& x, const m2m::Conflict& y) {
    if (x.time != y.time) return x.time < y.time;
    return x.type == m2m::ConflictType::Vertex && y.type == m2m::ConflictType::Edge;
  });
}

// Earliest arrival at `goal` after which the agent can stay forever, by
// breadth-first search over (cell, time) with explicit constraint checks.
// Returns the arrival time or nullopt within `horizon`.
inline std::optional<int> spacetime_shortest(const GridMap& map, int start, int goal,
                                             const std::vector<m2m::TimedPath>& others, int horizon) {
  int settle = 0;
  for (const auto& p : others) settle = std::max(settle, static_cast<int>(p.size()));
  auto blocked = [&](int from, int to, int t) {  // move from->to over (t, t+1)
    for (const auto& p : others) {
      if (cell_at(p, t + 1) == to) return true;
      if (from != to && cell_at(p, t) == to && cell_at(p, t + 1) == from) return true;
    }
    return false;
  };
  auto can_stay_from = [&](int t) {
    for (const auto& p : others)
      for (int k = t; k <= settle + 1; ++k)
        if (cell_at(p, k) == goal) return false;
    return true;
  };
  for (const auto& p : others)
    if (p.front() == start) return std::nullopt;
  std::vector<char> frontier(map.cell_count(), 0), next;
  frontier[start] = 1;
  for (int t = 0; t <= horizon; ++t) {
    if (frontier[goal] && can_stay_from(t)) return t;
    next.assign(map.cell_count(), 0);
    bool any = false;
    for (int c = 0; c < map.cell_count(); ++c) {
      if (!frontier[c]) continue;
      std::array<int, 4> nb{};
      const int k = map.neighbors(c, nb);
      for (int i = -1; i < k; ++i) {
        const int to = i < 0 ? c : nb[i];
        if (blocked(c, to, t)) continue;
        next[to] = 1;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    frontier.swap(next);
  }
  return std::nullopt;
}

}  // namespace testing
