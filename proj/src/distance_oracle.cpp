#include "m2m/distance_oracle.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace m2m {

namespace {

// Fills one table row; `scratch` is a reusable queue buffer.
void bfs_row(const GridMap& map, int source, std::uint16_t* row, std::vector<int>& scratch) {
  const int cells = map.cell_count();
  std::fill(row, row + cells, DistanceOracle::kUnreachable);
  scratch.resize(cells);
  int head = 0;
  int tail = 0;
  scratch[tail++] = source;
  row[source] = 0;
  std::array<int, 4> nbrs{};
  while (head < tail) {
    const int cur = scratch[head++];
    const int n = map.neighbors(cur, nbrs);
    for (int k = 0; k < n; ++k) {
      if (row[nbrs[k]] == DistanceOracle::kUnreachable) {
        row[nbrs[k]] = static_cast<std::uint16_t>(row[cur] + 1);
        scratch[tail++] = nbrs[k];
      }
    }
  }
}

void all_sources_serial(const GridMap& map, const std::vector<int>& sources,
                        std::vector<std::uint16_t>& table) {
  const std::size_t cells = static_cast<std::size_t>(map.cell_count());
  std::vector<int> scratch;
  for (std::size_t s = 0; s < sources.size(); ++s) bfs_row(map, sources[s], table.data() + s * cells, scratch);
}

void all_sources_parallel(const GridMap& map, const std::vector<int>& sources,
                          std::vector<std::uint16_t>& table) {
  const std::size_t cells = static_cast<std::size_t>(map.cell_count());
  const long count = static_cast<long>(sources.size());
#pragma omp parallel
  {
    std::vector<int> scratch;
#pragma omp for schedule(static)
    for (long s = 0; s < count; ++s) bfs_row(map, sources[s], table.data() + s * cells, scratch);
  }
}

}  // namespace

std::vector<int> bfs_distances(const GridMap& map, int source) {
  std::vector<std::uint16_t> row(map.cell_count());
  std::vector<int> scratch;
  bfs_row(map, source, row.data(), scratch);
  std::vector<int> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i)
    out[i] = row[i] == DistanceOracle::kUnreachable ? -1 : row[i];
  return out;
}

DistanceOracle::DistanceOracle(int cell_count, std::vector<int> sources, std::vector<std::uint16_t> table)
    : cells_(cell_count), sources_(std::move(sources)), row_of_(cell_count, -1), table_(std::move(table)) {
  for (std::size_t i = 0; i < sources_.size(); ++i) row_of_[sources_[i]] = static_cast<int>(i);
}

const std::uint16_t* DistanceOracle::row(int source_cell) const {
  if (!is_source(source_cell)) throw std::invalid_argument("cell " + std::to_string(source_cell) + " is not an endpoint");
  return table_.data() + static_cast<std::size_t>(row_of_[source_cell]) * cells_;
}

int DistanceOracle::distance(int from_cell, int to_cell) const {
  std::uint16_t d;
  if (is_source(to_cell)) {
    d = row(to_cell)[from_cell];
  } else if (is_source(from_cell)) {
    d = row(from_cell)[to_cell];
  } else {
    throw std::invalid_argument("distance lookup needs an endpoint on one side (cells " +
                                std::to_string(from_cell) + ", " + std::to_string(to_cell) + ")");
  }
  if (d == kUnreachable) throw std::logic_error("distance table corrupted: unreachable endpoint pair");
  return d;
}

DistanceOracle build_distance_oracle(const GridMap& map, ExecPolicy policy) {
  std::vector<int> sources = map.endpoints();
  std::vector<std::uint16_t> table(sources.size() * static_cast<std::size_t>(map.cell_count()));
  if (policy == ExecPolicy::Parallel)
    all_sources_parallel(map, sources, table);
  else
    all_sources_serial(map, sources, table);
  return DistanceOracle(map.cell_count(), std::move(sources), std::move(table));
}

int estimated_cost(const DistanceOracle& oracle, const GridMap& map, Vertex from, Vertex to) {
  return oracle.distance(map.index(from), map.index(to));
}

}  // namespace m2m
