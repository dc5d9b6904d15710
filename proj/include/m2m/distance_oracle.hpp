#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "m2m/exec_policy.hpp"
#include "m2m/grid_map.hpp"

namespace m2m {

/// Single-source BFS over the 4-connected grid. Unreachable cells get -1.
std::vector<int> bfs_distances(const GridMap& map, int source);

/// Exact shortest-path lengths (unit edges) from every endpoint to every cell.
/// Lookups are O(1). Immutable after construction; safe to share across threads.
class DistanceOracle {
 public:
  static constexpr std::uint16_t kUnreachable = std::numeric_limits<std::uint16_t>::max();

  DistanceOracle() = default;
  DistanceOracle(int cell_count, std::vector<int> sources, std::vector<std::uint16_t> table);

  bool is_source(int cell) const noexcept { return cell >= 0 && cell < cells_ && row_of_[cell] >= 0; }
  int source_count() const noexcept { return static_cast<int>(sources_.size()); }
  const std::vector<int>& sources() const noexcept { return sources_; }

  /// Distance between two cells, at least one of which must be an endpoint.
  /// Throws std::invalid_argument if neither is, std::logic_error if unreachable.
  int distance(int from_cell, int to_cell) const;

  /// Raw row access: distances from endpoint `source_cell` to every cell.
  const std::uint16_t* row(int source_cell) const;

  bool operator==(const DistanceOracle&) const = default;

 private:
  int cells_ = 0;
  std::vector<int> sources_;
  std::vector<int> row_of_;
  std::vector<std::uint16_t> table_;
};

DistanceOracle build_distance_oracle(const GridMap& map, ExecPolicy policy = ExecPolicy::Serial);

/// Estimated travel duration in timesteps between two cells.
int estimated_cost(const DistanceOracle& oracle, const GridMap& map, Vertex from, Vertex to);

}  // namespace m2m
