#include "m2m/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace m2m {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid value '" + value + "' for " + key);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw ConfigError("");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ConfigError("invalid value '" + value + "' for " + key);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_key_values(in);
}

namespace {

bool set_field(SimConfig& c, const std::string& key, const std::string& value) {
  if (key == "map") c.map = value;
  else if (key == "agents") c.agents = parse_number<int>(key, value);
  else if (key == "num_skus") c.num_skus = parse_number<int>(key, value);
  else if (key == "density") c.density = parse_double(key, value);
  else if (key == "release_rate") c.release_rate = parse_number<int>(key, value);
  else if (key == "active_cap") c.active_cap = parse_number<int>(key, value);
  else if (key == "mode") {
    try {
      c.mode = parse_allocator_mode(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "base_weight") c.cost.base_weight = parse_double(key, value);
  else if (key == "sku_weight") c.cost.sku_weight = parse_double(key, value);
  else if (key == "max_sequence") c.cost.max_sequence = parse_number<int>(key, value);
  else if (key == "spatial_weight") c.lns.spatial_weight = parse_double(key, value);
  else if (key == "temporal_weight") c.lns.temporal_weight = parse_double(key, value);
  else if (key == "remove_count") c.lns.remove_count = parse_number<int>(key, value);
  else if (key == "initial_temperature") c.lns.initial_temperature = parse_double(key, value);
  else if (key == "decay") c.lns.decay = parse_double(key, value);
  else if (key == "alloc_budget_seconds") c.alloc_budget_seconds = parse_double(key, value);
  else if (key == "lns_iterations") c.lns_iterations = parse_number<int>(key, value);
  else if (key == "horizon") c.horizon = parse_number<int>(key, value);
  else if (key == "seconds_per_tick") c.seconds_per_tick = parse_double(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "window_ticks") c.window_ticks = parse_number<int>(key, value);
  else if (key == "pbs_node_cap") c.pbs_node_cap = parse_number<int>(key, value);
  else if (key == "record_trajectory") c.record_trajectory = parse_bool(key, value);
  else return false;
  return true;
}

}  // namespace

void apply_setting(SimConfig& config, const std::string& key, const std::string& value) {
  if (!set_field(config, key, value)) throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> apply_settings(SimConfig& config, const std::map<std::string, std::string>& kv) {
  std::map<std::string, std::string> rest;
  for (const auto& [key, value] : kv) {
    if (!set_field(config, key, value)) rest.emplace(key, value);
  }
  return rest;
}

std::string canonical_text(const SimConfig& c) {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  };
  kv["map"] = c.map;
  kv["agents"] = std::to_string(c.agents);
  kv["num_skus"] = std::to_string(c.num_skus);
  kv["density"] = num(c.density);
  kv["release_rate"] = std::to_string(c.release_rate);
  kv["active_cap"] = std::to_string(c.active_cap);
  kv["mode"] = std::string(to_string(c.mode));
  kv["base_weight"] = num(c.cost.base_weight);
  kv["sku_weight"] = num(c.cost.sku_weight);
  kv["max_sequence"] = std::to_string(c.cost.max_sequence);
  kv["spatial_weight"] = num(c.lns.spatial_weight);
  kv["temporal_weight"] = num(c.lns.temporal_weight);
  kv["remove_count"] = std::to_string(c.lns.remove_count);
  kv["initial_temperature"] = num(c.lns.initial_temperature);
  kv["decay"] = num(c.lns.decay);
  kv["alloc_budget_seconds"] = num(c.alloc_budget_seconds);
  kv["lns_iterations"] = std::to_string(c.lns_iterations);
  kv["horizon"] = std::to_string(c.horizon);
  kv["seconds_per_tick"] = num(c.seconds_per_tick);
  kv["window_ticks"] = std::to_string(c.window_ticks);
  kv["pbs_node_cap"] = std::to_string(c.pbs_node_cap);
  kv["record_trajectory"] = c.record_trajectory ? "1" : "0";
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string run_directory_name(const SimConfig& config) {
  return config_hash(config) + "-s" + std::to_string(config.seed);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace m2m
