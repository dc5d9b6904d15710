#pragma once

#include <optional>
#include <vector>

#include "m2m/grid_map.hpp"

namespace m2m {

struct Neighbor {
  Vertex point;
  int distance;  // L1
};

/// 2-D KD-tree over distinct grid points with L1 nearest-neighbour search.
///
/// Deletion tombstones the node; the tree is rebuilt (balanced, median split)
/// once tombstones exceed half of the nodes or an insertion path grows past
/// twice the balanced depth. Searches skip tombstones, so results stay exact.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vertex> points);

  /// Returns false if the point is already present.
  bool insert(Vertex p);
  /// Returns false if the point is not present.
  bool erase(Vertex p);
  bool contains(Vertex p) const;

  /// Nearest live point to `query`, skipping `exclude` if given.
  std::optional<Neighbor> nearest(Vertex query, std::optional<Vertex> exclude = std::nullopt) const;

  int size() const noexcept { return live_; }
  bool empty() const noexcept { return live_ == 0; }
  int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
  int tombstones() const noexcept { return node_count() - live_; }

  /// Live points in unspecified order.
  std::vector<Vertex> points() const;

 private:
  struct Node {
    Vertex point;
    int left = -1;
    int right = -1;
    bool dead = false;
  };

  int build(std::vector<Vertex>& pts, int lo, int hi, int depth);
  void rebuild();
  int find(Vertex p) const;
  void search(int node, int depth, Vertex query, const std::optional<Vertex>& exclude,
              std::optional<Neighbor>& best) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int live_ = 0;
  int max_depth_ = 0;
};

}  // namespace m2m
