#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "m2m/sim.hpp"

namespace m2m {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines; blank lines and `#` comments are skipped. Later keys
/// overwrite earlier ones.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

/// Applies one setting. Unknown keys and unparsable values throw ConfigError.
void apply_setting(SimConfig& config, const std::string& key, const std::string& value);

/// Applies every key that names a SimConfig field and returns the rest.
std::map<std::string, std::string> apply_settings(SimConfig& config, const std::map<std::string, std::string>& kv);

/// Every SimConfig field except the seed, one `key=value` per line, sorted.
std::string canonical_text(const SimConfig& config);

/// 64-bit FNV-1a of canonical_text, as 16 hex digits.
std::string config_hash(const SimConfig& config);

/// <hash>-s<seed>
std::string run_directory_name(const SimConfig& config);

std::vector<std::string> split_list(const std::string& text);

}  // namespace m2m
