#pragma once
// Flat "key = value" config files whose keys are exactly the SimConfig
// member names. '#' starts a comment, "key: value" is accepted too, lists are
// comma separated with optional brackets. Unknown keys are errors.
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "salt/sde.hpp"

namespace salt {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parse and validate; missing keys keep their defaults.
/// Keys absent from the text keep their value in `base`.
SimConfig parse_config_text(std::string_view text, const std::string& origin = "<config>",
                            const SimConfig& base = SimConfig{});
SimConfig parse_config(const std::filesystem::path& path, const SimConfig& base = SimConfig{});

/// Set one key from its textual value. Throws ConfigError naming the key.
void set_config_value(SimConfig& cfg, const std::string& key, const std::string& value);

/// Every key in canonical order.
const std::vector<std::string>& config_keys();

/// Canonical text with every key, defaults included; parse_config_text of it
/// gives back the same config.
std::string format_config(const SimConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
inline std::uint64_t config_hash(const SimConfig& cfg) { return fnv1a(format_config(cfg)); }

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace salt
