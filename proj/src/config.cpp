#include "salt/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace salt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": cannot parse '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, std::string text) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ConfigError(key + ": unterminated list");
    text = text.substr(1, text.size() - 2);
  }
  std::vector<T> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

struct Field {
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <typename T>
Field number(T SimConfig::*member, const std::string& key) {
  return {[member, key](SimConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
          [member](const SimConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <typename T>
Field list(std::vector<T> SimConfig::*member, const std::string& key) {
  return {[member, key](SimConfig& c, const std::string& v) { c.*member = parse_list<T>(key, v); },
          [member](const SimConfig& c) { return "[" + join(c.*member) + "]"; }};
}

Field boolean(bool SimConfig::*member, const std::string& key) {
  return {[member, key](SimConfig& c, const std::string& v) { c.*member = parse_bool(key, v); },
          [member](const SimConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

struct Table {
  std::vector<std::string> keys;
  std::map<std::string, Field> fields;

  void add(const std::string& key, Field f) {
    keys.push_back(key);
    fields.emplace(key, std::move(f));
  }
};

const Table& table() {
  static const Table t = [] {
    Table t;
#define SALT_NUMBER(name) t.add(#name, number(&SimConfig::name, #name))
#define SALT_LIST(name) t.add(#name, list(&SimConfig::name, #name))
#define SALT_BOOL(name) t.add(#name, boolean(&SimConfig::name, #name))
    SALT_NUMBER(dim);
    SALT_NUMBER(resolution);
    SALT_NUMBER(galerkin_lambda);
    SALT_NUMBER(nu);
    SALT_NUMBER(xi_count);
    SALT_NUMBER(xi_decay);
    SALT_NUMBER(xi_amplitude);
    SALT_NUMBER(xi_max_lambda);
    SALT_NUMBER(dt);
    SALT_NUMBER(horizon);
    SALT_NUMBER(M);
    t.add("scheme", {[](SimConfig& c, const std::string& v) {
                       try {
                         c.scheme = parse_scheme(v);
                       } catch (const std::invalid_argument& e) {
                         throw ConfigError(std::string("scheme: ") + e.what());
                       }
                     },
                     [](const SimConfig& c) { return to_string(c.scheme); }});
    SALT_NUMBER(seed);
    SALT_NUMBER(snapshot_every);
    t.add("monitor", {[](SimConfig& c, const std::string& v) {
                        try {
                          c.monitor = parse_monitor(v);
                        } catch (const std::invalid_argument& e) {
                          throw ConfigError(std::string("monitor: ") + e.what());
                        }
                      },
                      [](const SimConfig& c) { return to_string(c.monitor); }});
    SALT_BOOL(nonlinear);
    SALT_BOOL(exact_viscosity);
    t.add("initial", {[](SimConfig& c, const std::string& v) { c.initial = v; },
                      [](const SimConfig& c) { return c.initial; }});
    SALT_NUMBER(ic_amplitude);
    SALT_NUMBER(ic_max_lambda);
    SALT_NUMBER(ic_decay_exponent);
    SALT_LIST(levels);
    SALT_NUMBER(paths);
    SALT_LIST(small_times);
    SALT_NUMBER(threads);
    SALT_NUMBER(audit_samples);
    SALT_NUMBER(audit_xi_count);
    SALT_LIST(audit_resolutions);
    SALT_NUMBER(kappa_min);
    SALT_NUMBER(p);
    SALT_NUMBER(q);
    SALT_NUMBER(p_tilde);
    SALT_NUMBER(q_tilde);
#undef SALT_NUMBER
#undef SALT_LIST
#undef SALT_BOOL
    return t;
  }();
  return t;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void set_config_value(SimConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = table().fields.find(key);
  if (it == table().fields.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(cfg, unquote(trim(value)));
}

const std::vector<std::string>& config_keys() { return table().keys; }

std::string format_config(const SimConfig& cfg) {
  std::string out;
  for (const auto& key : table().keys) out += key + " = " + table().fields.at(key).get(cfg) + "\n";
  return out;
}

SimConfig parse_config_text(std::string_view text, const std::string& origin, const SimConfig& base) {
  SimConfig cfg = base;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    if (sep == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, sep));
    if (seen.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    try {
      set_config_value(cfg, key, line.substr(sep + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

SimConfig parse_config(const std::filesystem::path& path, const SimConfig& base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.string(), base);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace salt
