#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "m2m/mapf.hpp"

namespace m2m {

namespace {

constexpr long kShortfallPenalty = 1000;

struct PbsNode {
  std::vector<TimedPath> paths;
  std::vector<std::vector<int>> higher;  // direct higher-priority agents
  std::vector<long> cost;                // per agent
  long total = 0;
};

class Search {
 public:
  Search(std::span<const PbsAgent> agents, const LowLevelPlanner& planner, const PbsParams& params)
      : agents_(agents),
        planner_(planner),
        params_(params),
        horizon_(params.horizon > 0 ? params.horizon : planner.default_horizon()) {}

  PbsResult solve() {
    const int n = static_cast<int>(agents_.size());
    PbsResult result;
    result.stalled.assign(n, 0);

    PbsNode root;
    root.paths.resize(n);
    root.higher.resize(n);
    root.cost.assign(n, 0);
    bool root_ok = true;
    for (int a = 0; a < n; ++a) {
      const PbsAgent& ag = agents_[a];
      if (ag.kept && !ag.kept->empty() && ag.kept->front() == ag.start) {
        root.paths[a] = *ag.kept;
      } else if (auto p = plan(a, {})) {
        root.paths[a] = std::move(*p);
      } else {
        root_ok = false;
        break;
      }
      root.cost[a] = path_cost(a, root.paths[a]);
      root.total += root.cost[a];
    }

    if (root_ok) {
      std::vector<PbsNode> stack;
      stack.push_back(std::move(root));
      while (!stack.empty() && expanded_ < params_.node_cap) {
        PbsNode node = std::move(stack.back());
        stack.pop_back();
        auto conflict = first_conflict(node.paths);
        if (!conflict) {
          result.paths = std::move(node.paths);
          result.expanded = expanded_;
          result.low_level_calls = calls_;
          return result;
        }
        ++expanded_;
        const int i = conflict->first;
        const int j = conflict->second;
        std::optional<PbsNode> left = branch(node, i, j);   // i above j
        std::optional<PbsNode> right = branch(node, j, i);  // j above i
        // Push the costlier child first so the cheaper one is explored next.
        if (left && right && left->total < right->total) std::swap(left, right);
        if (left) stack.push_back(std::move(*left));
        if (right) stack.push_back(std::move(*right));
      }
    }

    result.fallback = true;
    fallback(result);
    result.expanded = expanded_;
    result.low_level_calls = calls_;
    return result;
  }

 private:
  std::optional<TimedPath> plan(int a, std::span<const TimedPath* const> constraints) {
    ++calls_;
    return planner_.plan(agents_[a].start, agents_[a].goal, constraints, agents_[a].mode, horizon_);
  }

  long path_cost(int a, const TimedPath& p) const {
    const long penalty = agents_[a].flexible ? 1 : kShortfallPenalty;
    return static_cast<long>(p.size()) - 1 + penalty * planner_.heuristic(agents_[a].goal, p.back());
  }

  static std::vector<int> ancestors(const PbsNode& node, int a) {
    std::vector<char> seen(node.higher.size(), 0);
    std::vector<int> stack{a}, out;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int h : node.higher[cur]) {
        if (seen[h]) continue;
        seen[h] = 1;
        out.push_back(h);
        stack.push_back(h);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // a and everything below it, in an order where each agent follows all of
  // its higher-priority agents inside the set.
  static std::vector<int> affected_in_order(const PbsNode& node, int a) {
    const int n = static_cast<int>(node.higher.size());
    std::vector<std::vector<int>> lower(n);
    for (int b = 0; b < n; ++b)
      for (int h : node.higher[b]) lower[h].push_back(b);
    std::vector<char> in_set(n, 0);
    std::vector<int> stack{a};
    in_set[a] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int l : lower[cur])
        if (!in_set[l]) {
          in_set[l] = 1;
          stack.push_back(l);
        }
    }
    std::vector<int> indeg(n, 0);
    for (int b = 0; b < n; ++b) {
      if (!in_set[b]) continue;
      for (int h : node.higher[b])
        if (in_set[h]) ++indeg[b];
    }
    std::vector<int> order;
    std::vector<int> ready;
    for (int b = 0; b < n; ++b)
      if (in_set[b] && indeg[b] == 0) ready.push_back(b);
    while (!ready.empty()) {
      auto it = std::min_element(ready.begin(), ready.end());
      const int b = *it;
      ready.erase(it);
      order.push_back(b);
      for (int l : lower[b])
        if (in_set[l] && --indeg[l] == 0) ready.push_back(l);
    }
    return order;
  }

  std::optional<PbsNode> branch(const PbsNode& parent, int high, int low) {
    const std::vector<int> above_high = ancestors(parent, high);
    if (std::binary_search(above_high.begin(), above_high.end(), low)) return std::nullopt;  // would cycle
    PbsNode child = parent;
    child.higher[low].push_back(high);
    for (int b : affected_in_order(child, low)) {
      const std::vector<int> above = ancestors(child, b);
      if (b != low) {
        bool clash = false;
        for (int h : above)
          if (detect_collision(child.paths[b], child.paths[h])) {
            clash = true;
            break;
          }
        if (!clash) continue;
      }
      std::vector<const TimedPath*> cons;
      cons.reserve(above.size());
      for (int h : above) cons.push_back(&child.paths[h]);
      auto p = plan(b, cons);
      if (!p) return std::nullopt;
      child.total -= child.cost[b];
      child.paths[b] = std::move(*p);
      child.cost[b] = path_cost(b, child.paths[b]);
      child.total += child.cost[b];
    }
    return child;
  }

  // Sequential planning. Agents that cannot be routed are pinned to their
  // start and the pass restarts with every pinned agent on top.
  void fallback(PbsResult& result) {
    const int n = static_cast<int>(agents_.size());
    std::vector<int> kept, fresh;
    for (int a = 0; a < n; ++a) {
      const PbsAgent& ag = agents_[a];
      (ag.kept && !ag.kept->empty() && ag.kept->front() == ag.start ? kept : fresh).push_back(a);
    }
    std::mt19937_64 rng(params_.fallback_seed);
    std::shuffle(fresh.begin(), fresh.end(), rng);

    std::vector<char> pinned(n, 0);
    while (true) {
      std::vector<int> order;
      for (int a = 0; a < n; ++a)
        if (pinned[a]) order.push_back(a);
      for (int a : kept)
        if (!pinned[a]) order.push_back(a);
      for (int a : fresh)
        if (!pinned[a]) order.push_back(a);

      std::vector<TimedPath> paths(n);
      std::vector<const TimedPath*> placed;
      bool restart = false;
      for (int a : order) {
        if (pinned[a]) {
          paths[a] = {agents_[a].start};
        } else {
          bool reuse = false;
          if (agents_[a].kept && !agents_[a].kept->empty() && agents_[a].kept->front() == agents_[a].start) {
            reuse = std::none_of(placed.begin(), placed.end(),
                                 [&](const TimedPath* p) { return detect_collision(*agents_[a].kept, *p); });
          }
          if (reuse) {
            paths[a] = *agents_[a].kept;
          } else if (auto p = plan(a, placed)) {
            paths[a] = std::move(*p);
          } else {
            pinned[a] = 1;
            restart = true;
            break;
          }
        }
        placed.push_back(&paths[a]);
      }
      if (restart) continue;
      result.paths = std::move(paths);
      result.stalled.assign(pinned.begin(), pinned.end());
      return;
    }
  }

  std::span<const PbsAgent> agents_;
  const LowLevelPlanner& planner_;
  PbsParams params_;
  int horizon_;
  int expanded_ = 0;
  int calls_ = 0;
};

}  // namespace

PbsResult pbs_solve(std::span<const PbsAgent> agents, const LowLevelPlanner& planner, const PbsParams& params) {
  for (std::size_t a = 0; a < agents.size(); ++a)
    for (std::size_t b = a + 1; b < agents.size(); ++b)
      if (agents[a].start == agents[b].start) throw std::invalid_argument("pbs_solve: two agents share a start cell");
  return Search(agents, planner, params).solve();
}

}  // namespace m2m
