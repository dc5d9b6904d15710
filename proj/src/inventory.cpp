#include "m2m/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace m2m {

namespace {

std::string describe(Vertex v) { return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")"; }

}  // namespace

Inventory::Inventory(const GridMap& map, int num_skus)
    : map_(&map), occupancy_(map.cell_count(), -1), by_sku_(num_skus), trees_(num_skus) {
  if (num_skus <= 0) throw InventoryError("inventory needs at least one SKU");
  empty_.insert(map.storage_endpoints().begin(), map.storage_endpoints().end());
}

void Inventory::check_sku(SkuId sku) const {
  if (sku < 0 || sku >= num_skus()) throw InventoryError("SKU " + std::to_string(sku) + " out of range");
}

void Inventory::place_item(Vertex cell, SkuId sku) {
  check_sku(sku);
  if (!map_->in_bounds(cell) || map_->kind(cell) != CellKind::StorageEndpoint)
    throw InventoryError("cell " + describe(cell) + " is not a storage endpoint");
  const int idx = map_->index(cell);
  if (occupancy_[idx] >= 0) throw InventoryError("cell " + describe(cell) + " is already occupied");
  occupancy_[idx] = sku;
  by_sku_[sku].insert(idx);
  trees_[sku].insert(cell);
  empty_.erase(idx);
  ++occupied_;
}

SkuId Inventory::remove_item(Vertex cell) {
  if (!map_->in_bounds(cell)) throw InventoryError("cell " + describe(cell) + " is off the map");
  const int idx = map_->index(cell);
  const SkuId sku = occupancy_[idx];
  if (sku < 0) throw InventoryError("cell " + describe(cell) + " holds no item");
  occupancy_[idx] = -1;
  by_sku_[sku].erase(idx);
  trees_[sku].erase(cell);
  empty_.insert(idx);
  --occupied_;
  return sku;
}

std::optional<int> Inventory::nearest_neighbor(SkuId sku, Vertex query, std::optional<Vertex> exclude) const {
  check_sku(sku);
  auto hit = trees_[sku].nearest(query, exclude);
  if (!hit) return std::nullopt;
  return hit->distance;
}

std::optional<SkuId> Inventory::item_at(Vertex cell) const {
  if (!map_->in_bounds(cell)) return std::nullopt;
  return item_at_index(map_->index(cell));
}

std::vector<SkuId> Inventory::stocked_skus() const {
  std::vector<SkuId> out;
  for (SkuId s = 0; s < num_skus(); ++s)
    if (!by_sku_[s].empty()) out.push_back(s);
  return out;
}

void Inventory::write_csv(std::ostream& out) const {
  out << "cell_x,cell_y,sku\n";
  for (int idx : map_->storage_endpoints()) {
    if (occupancy_[idx] < 0) continue;
    const Vertex v = map_->vertex(idx);
    out << v.x << ',' << v.y << ',' << occupancy_[idx] << '\n';
  }
}

Inventory initialize_inventory(const GridMap& map, double density, int num_skus, std::mt19937_64& rng) {
  if (!(density >= 0.0 && density <= 1.0)) throw InventoryError("density must lie in [0,1]");
  Inventory inv(map, num_skus);
  std::vector<int> cells = map.storage_endpoints();
  const auto target = static_cast<std::size_t>(std::floor(density * static_cast<double>(cells.size()) + 1e-9));
  std::shuffle(cells.begin(), cells.end(), rng);
  std::uniform_int_distribution<SkuId> pick(0, num_skus - 1);
  for (std::size_t i = 0; i < target; ++i) inv.place_item(map.vertex(cells[i]), pick(rng));
  return inv;
}

}  // namespace m2m
