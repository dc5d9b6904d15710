#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "m2m/grid_map.hpp"
#include "m2m/kd_tree.hpp"

namespace m2m {

using SkuId = std::int32_t;

class InventoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Storage occupancy plus one KD-tree per SKU over the occupied cells.
/// Single writer; const queries may run concurrently between mutations.
class Inventory {
 public:
  Inventory(const GridMap& map, int num_skus);

  void place_item(Vertex cell, SkuId sku);
  SkuId remove_item(Vertex cell);

  /// L1 distance from `query` to the closest stored item of `sku`, ignoring
  /// `exclude`. nullopt when no such item exists.
  std::optional<int> nearest_neighbor(SkuId sku, Vertex query, std::optional<Vertex> exclude = std::nullopt) const;

  std::optional<SkuId> item_at(Vertex cell) const;
  std::optional<SkuId> item_at_index(int cell) const {
    return occupancy_[cell] < 0 ? std::nullopt : std::optional<SkuId>(occupancy_[cell]);
  }

  int num_skus() const noexcept { return static_cast<int>(by_sku_.size()); }
  int count(SkuId sku) const { return static_cast<int>(by_sku_.at(sku).size()); }
  int occupied() const noexcept { return occupied_; }
  int storage_count() const noexcept { return static_cast<int>(map_->storage_endpoints().size()); }
  double density() const noexcept {
    return storage_count() == 0 ? 0.0 : static_cast<double>(occupied_) / storage_count();
  }

  /// Cell indices, ascending.
  const std::set<int>& cells_holding(SkuId sku) const { return by_sku_.at(sku); }
  const std::set<int>& empty_storage() const noexcept { return empty_; }
  std::vector<SkuId> stocked_skus() const;

  const KdTree& index(SkuId sku) const { return trees_.at(sku); }
  const GridMap& map() const noexcept { return *map_; }

  /// CSV snapshot: cell_x,cell_y,sku
  void write_csv(std::ostream& out) const;

 private:
  void check_sku(SkuId sku) const;

  const GridMap* map_;
  std::vector<SkuId> occupancy_;  // per cell, -1 when empty
  std::vector<std::set<int>> by_sku_;
  std::vector<KdTree> trees_;
  std::set<int> empty_;
  int occupied_ = 0;
};

/// Fills floor(density * storage) random storage endpoints with uniformly
/// sampled SKUs. Deterministic for a given generator state.
Inventory initialize_inventory(const GridMap& map, double density, int num_skus, std::mt19937_64& rng);

}  // namespace m2m
