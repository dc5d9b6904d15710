#include "m2m/grid_map.hpp"

#include <fstream>
#include <queue>
#include <sstream>

namespace m2m {

namespace {

char cell_char(CellKind kind) {
  switch (kind) {
    case CellKind::Free: return '.';
    case CellKind::Obstacle: return '@';
    case CellKind::StorageEndpoint: return 'E';
    case CellKind::LoadingEndpoint: return 'L';
  }
  return '?';
}

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
    line.remove_suffix(1);
  return line;
}

int parse_header_value(std::string_view line, std::string_view key) {
  line = trim_cr(line);
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ')
    throw MapError(MapError::Kind::MalformedHeader,
                   "expected '" + std::string(key) + " <n>', got '" + std::string(line) + "'");
  std::string rest(line.substr(key.size() + 1));
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(rest, &used);
  } catch (const std::exception&) {
    throw MapError(MapError::Kind::MalformedHeader, "non-numeric " + std::string(key));
  }
  if (used != rest.size() || value <= 0)
    throw MapError(MapError::Kind::MalformedHeader, "invalid " + std::string(key) + " '" + rest + "'");
  return value;
}

}  // namespace

GridMap::GridMap(int width, int height, std::vector<CellKind> cells, MapRequirements requirements)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0 || static_cast<int>(cells_.size()) != width_ * height_)
    throw MapError(MapError::Kind::MalformedHeader, "cell count does not match declared dimensions");

  int first = -1;
  for (int i = 0; i < cell_count(); ++i) {
    switch (cells_[i]) {
      case CellKind::Obstacle: continue;
      case CellKind::StorageEndpoint: storage_.push_back(i); break;
      case CellKind::LoadingEndpoint: loading_.push_back(i); break;
      case CellKind::Free: free_.push_back(i); break;
    }
    if (is_endpoint(i)) endpoints_.push_back(i);
    if (first < 0) first = i;
    ++traversable_count_;
  }
  if (first < 0) throw MapError(MapError::Kind::Disconnected, "map has no traversable cells");

  std::vector<char> seen(cells_.size(), 0);
  std::queue<int> frontier;
  frontier.push(first);
  seen[first] = 1;
  int reached = 1;
  std::array<int, 4> nbrs{};
  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop();
    int n = neighbors(cur, nbrs);
    for (int k = 0; k < n; ++k) {
      if (!seen[nbrs[k]]) {
        seen[nbrs[k]] = 1;
        ++reached;
        frontier.push(nbrs[k]);
      }
    }
  }
  if (reached != traversable_count_) {
    for (int i = 0; i < cell_count(); ++i) {
      if (traversable(i) && !seen[i]) {
        Vertex v = vertex(i);
        throw MapError(MapError::Kind::Disconnected,
                       "cell (" + std::to_string(v.x) + "," + std::to_string(v.y) +
                           ") is not reachable from the rest of the free space");
      }
    }
  }
  if (requirements == MapRequirements::Warehouse && (storage_.empty() || loading_.empty()))
    throw MapError(MapError::Kind::NoEndpoints,
                   "a warehouse map needs at least one storage (E) and one loading (L) endpoint");
}

int GridMap::neighbors(int idx, std::array<int, 4>& out) const noexcept {
  int n = 0;
  const int x = idx % width_;
  const int y = idx / width_;
  // Fixed order (up, left, right, down) keeps every search deterministic.
  if (y > 0 && traversable(idx - width_)) out[n++] = idx - width_;
  if (x > 0 && traversable(idx - 1)) out[n++] = idx - 1;
  if (x + 1 < width_ && traversable(idx + 1)) out[n++] = idx + 1;
  if (y + 1 < height_ && traversable(idx + width_)) out[n++] = idx + width_;
  return n;
}

std::string GridMap::to_text() const {
  std::ostringstream out;
  out << "height " << height_ << "\nwidth " << width_ << "\nmap\n";
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out << cell_char(cells_[y * width_ + x]);
    out << '\n';
  }
  return out.str();
}

GridMap parse_map(std::string_view text, MapRequirements requirements) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(trim_cr(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.size() < 3) throw MapError(MapError::Kind::MalformedHeader, "missing header lines");
  const int height = parse_header_value(lines[0], "height");
  const int width = parse_header_value(lines[1], "width");
  if (lines[2] != "map") throw MapError(MapError::Kind::MalformedHeader, "expected 'map' on line 3");
  if (static_cast<int>(lines.size()) - 3 != height)
    throw MapError(MapError::Kind::MalformedHeader,
                   "declared height " + std::to_string(height) + " but found " +
                       std::to_string(lines.size() - 3) + " rows");

  std::vector<CellKind> cells;
  cells.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    std::string_view row = lines[3 + y];
    if (static_cast<int>(row.size()) != width)
      throw MapError(MapError::Kind::MalformedHeader,
                     "row " + std::to_string(y) + " has " + std::to_string(row.size()) +
                         " cells, expected " + std::to_string(width));
    for (int x = 0; x < width; ++x) {
      switch (row[x]) {
        case '.': cells.push_back(CellKind::Free); break;
        case '@': cells.push_back(CellKind::Obstacle); break;
        case 'E': cells.push_back(CellKind::StorageEndpoint); break;
        case 'L': cells.push_back(CellKind::LoadingEndpoint); break;
        default:
          throw MapError(MapError::Kind::UnknownCell, std::string("unknown cell character '") + row[x] +
                                                          "' at (" + std::to_string(x) + "," +
                                                          std::to_string(y) + ")");
      }
    }
  }
  return GridMap(width, height, std::move(cells), requirements);
}

GridMap load_map(const std::filesystem::path& path, MapRequirements requirements) {
  std::ifstream in(path);
  if (!in) throw MapError(MapError::Kind::Io, "cannot open map file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str(), requirements);
}

std::filesystem::path resolve_map_path(const std::string& name_or_path) {
  std::filesystem::path candidate(name_or_path);
  if (std::filesystem::exists(candidate)) return candidate;
  std::filesystem::path asset = std::filesystem::path(M2M_ASSET_DIR) / "maps" / (name_or_path + ".map");
  if (std::filesystem::exists(asset)) return asset;
  throw MapError(MapError::Kind::Io, "no map file or bundled asset named '" + name_or_path + "'");
}

}  // namespace m2m
