#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace m2m {

enum class CellKind : std::uint8_t { Free, Obstacle, StorageEndpoint, LoadingEndpoint };

/// Grid coordinate. x is the column, y the row (row 0 is the first map line).
struct Vertex {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Vertex, Vertex) = default;
  friend constexpr auto operator<=>(Vertex, Vertex) = default;
};

inline int l1_distance(Vertex a, Vertex b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

class MapError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, UnknownCell, Disconnected, NoEndpoints, Io };

  MapError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Which endpoint population a map must carry to be accepted.
enum class MapRequirements {
  Any,        ///< any connected grid
  Warehouse,  ///< at least one storage and one loading endpoint
};

/// 4-connected warehouse grid. Cells are addressed either by Vertex or by the
/// dense index y * width + x. Immutable after construction.
class GridMap {
 public:
  /// Validates connectivity of the non-obstacle cells. Throws MapError.
  GridMap(int width, int height, std::vector<CellKind> cells,
          MapRequirements requirements = MapRequirements::Any);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int cell_count() const noexcept { return width_ * height_; }

  int index(Vertex v) const noexcept { return v.y * width_ + v.x; }
  Vertex vertex(int idx) const noexcept { return {idx % width_, idx / width_}; }
  bool in_bounds(Vertex v) const noexcept {
    return v.x >= 0 && v.x < width_ && v.y >= 0 && v.y < height_;
  }

  CellKind kind(Vertex v) const { return cells_.at(index(v)); }
  CellKind kind_at(int idx) const noexcept { return cells_[idx]; }
  bool traversable(int idx) const noexcept { return cells_[idx] != CellKind::Obstacle; }
  bool traversable(Vertex v) const noexcept { return in_bounds(v) && traversable(index(v)); }
  bool is_endpoint(int idx) const noexcept {
    return cells_[idx] == CellKind::StorageEndpoint || cells_[idx] == CellKind::LoadingEndpoint;
  }

  /// Writes traversable 4-neighbours of idx into out and returns their count.
  int neighbors(int idx, std::array<int, 4>& out) const noexcept;

  /// Cell indices, ascending.
  const std::vector<int>& storage_endpoints() const noexcept { return storage_; }
  const std::vector<int>& loading_endpoints() const noexcept { return loading_; }
  const std::vector<int>& endpoints() const noexcept { return endpoints_; }
  const std::vector<int>& free_cells() const noexcept { return free_; }
  int traversable_count() const noexcept { return traversable_count_; }

  /// Serialises back into the ASCII map format.
  std::string to_text() const;

 private:
  int width_;
  int height_;
  std::vector<CellKind> cells_;
  std::vector<int> storage_;
  std::vector<int> loading_;
  std::vector<int> endpoints_;
  std::vector<int> free_;
  int traversable_count_ = 0;
};

/// Parses the ASCII format:
///   height <H>
///   width <W>
///   map
///   <H lines of W characters from ". @ E L">
GridMap parse_map(std::string_view text, MapRequirements requirements = MapRequirements::Any);

GridMap load_map(const std::filesystem::path& path,
                 MapRequirements requirements = MapRequirements::Warehouse);

/// Resolves a bundled asset name ("restricted", "open_top", "open") or a file path.
std::filesystem::path resolve_map_path(const std::string& name_or_path);

}  // namespace m2m
