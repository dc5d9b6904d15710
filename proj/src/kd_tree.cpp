#include "m2m/kd_tree.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>

namespace m2m {

namespace {

inline int coord(Vertex v, int axis) { return axis == 0 ? v.x : v.y; }

// Ordering consistent with the descent rule: go left iff strictly smaller on the axis.
inline bool goes_left(Vertex p, Vertex node, int axis) { return coord(p, axis) < coord(node, axis); }

int balanced_depth(int n) { return n <= 1 ? 1 : std::bit_width(static_cast<unsigned>(n)); }

}  // namespace

KdTree::KdTree(std::vector<Vertex> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  nodes_.reserve(points.size());
  root_ = build(points, 0, static_cast<int>(points.size()), 0);
  live_ = static_cast<int>(points.size());
}

int KdTree::build(std::vector<Vertex>& pts, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  max_depth_ = std::max(max_depth_, depth + 1);
  const int axis = depth % 2;
  auto less = [axis](Vertex a, Vertex b) {
    return coord(a, axis) != coord(b, axis) ? coord(a, axis) < coord(b, axis) : a < b;
  };
  std::sort(pts.begin() + lo, pts.begin() + hi, less);
  int mid = lo + (hi - lo) / 2;
  // Equal keys must all sit right of the split point.
  while (mid > lo && coord(pts[mid - 1], axis) == coord(pts[mid], axis)) --mid;
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{pts[mid]});
  const int left = build(pts, lo, mid, depth + 1);
  const int right = build(pts, mid + 1, hi, depth + 1);
  nodes_[idx].left = left;
  nodes_[idx].right = right;
  return idx;
}

void KdTree::rebuild() {
  std::vector<Vertex> pts = points();
  nodes_.clear();
  max_depth_ = 0;
  root_ = build(pts, 0, static_cast<int>(pts.size()), 0);
  live_ = static_cast<int>(pts.size());
}

int KdTree::find(Vertex p) const {
  int cur = root_;
  int depth = 0;
  while (cur >= 0) {
    const Node& n = nodes_[cur];
    if (n.point == p) return cur;
    cur = goes_left(p, n.point, depth % 2) ? n.left : n.right;
    ++depth;
  }
  return -1;
}

bool KdTree::contains(Vertex p) const {
  const int idx = find(p);
  return idx >= 0 && !nodes_[idx].dead;
}

bool KdTree::insert(Vertex p) {
  const int existing = find(p);
  if (existing >= 0) {
    if (!nodes_[existing].dead) return false;
    nodes_[existing].dead = false;
    ++live_;
    return true;
  }
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{p});
  ++live_;
  if (root_ < 0) {
    root_ = idx;
    max_depth_ = 1;
    return true;
  }
  int cur = root_;
  int depth = 0;
  while (true) {
    Node& n = nodes_[cur];
    int& next = goes_left(p, n.point, depth % 2) ? n.left : n.right;
    ++depth;
    if (next < 0) {
      next = idx;
      break;
    }
    cur = next;
  }
  max_depth_ = std::max(max_depth_, depth + 1);
  if (max_depth_ > 2 * balanced_depth(node_count()) + 4) rebuild();
  return true;
}

bool KdTree::erase(Vertex p) {
  const int idx = find(p);
  if (idx < 0 || nodes_[idx].dead) return false;
  nodes_[idx].dead = true;
  --live_;
  if (live_ == 0) {
    nodes_.clear();
    root_ = -1;
    max_depth_ = 0;
  } else if (tombstones() * 2 > node_count()) {
    rebuild();
  }
  return true;
}

std::vector<Vertex> KdTree::points() const {
  std::vector<Vertex> out;
  out.reserve(live_);
  for (const Node& n : nodes_)
    if (!n.dead) out.push_back(n.point);
  return out;
}

void KdTree::search(int node, int depth, Vertex query, const std::optional<Vertex>& exclude,
                    std::optional<Neighbor>& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  if (!n.dead && !(exclude && *exclude == n.point)) {
    const int d = l1_distance(query, n.point);
    if (!best || d < best->distance || (d == best->distance && n.point < best->point)) best = Neighbor{n.point, d};
  }
  const int axis = depth % 2;
  const int diff = coord(query, axis) - coord(n.point, axis);
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, depth + 1, query, exclude, best);
  // Every point across the split differs by at least |diff| on this axis.
  if (!best || std::abs(diff) <= best->distance) search(far, depth + 1, query, exclude, best);
}

std::optional<Neighbor> KdTree::nearest(Vertex query, std::optional<Vertex> exclude) const {
  std::optional<Neighbor> best;
  search(root_, 0, query, exclude, best);
  return best;
}

}  // namespace m2m
