#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"

namespace ellreg {

/// Flat `key = value` configuration with dotted key prefixes acting as
/// sections (`field.kind`, `grid.m`, ...).  `#` starts a comment; blank
/// lines are ignored; keys may not repeat.  Errors carry the line number
/// and the field name so a bad file is diagnosable from the message alone.
class Config {
 public:
  static Config parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path.string());
  }

  static Config parse_text(const std::string& text,
                           const std::string& origin = "<string>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw config_error(origin + " line " + std::to_string(lineno) +
                           ": expected `key = value`, got `" + trimmed + "`");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw config_error(origin + " line " + std::to_string(lineno) +
                           ": empty key");
      if (cfg.values_.count(key))
        throw config_error(origin + " line " + std::to_string(lineno) +
                           ": duplicate key `" + key + "`");
      cfg.values_[key] = value;
      cfg.lines_[key] = lineno;
      cfg.order_.push_back(key);
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw config_error(origin_ + ": missing required field `" + key + "`");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? require_double(key) : fallback;
  }

  double require_double(const std::string& key) const {
    return parse_double(require_string(key), key);
  }

  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? require_int(key) : fallback;
  }

  long long require_int(const std::string& key) const {
    const std::string v = require_string(key);
    std::size_t pos = 0;
    long long r = 0;
    try {
      r = std::stoll(v, &pos);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got `" + v + "`");
    }
    if (pos != v.size()) fail(key, "expected an integer, got `" + v + "`");
    return r;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = require_string(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key, "expected true/false, got `" + v + "`");
    return false;
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream in(require_string(key));
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) fail(key, "empty entry in list");
      out.push_back(parse_double(t, key));
    }
    if (out.empty()) fail(key, "expected a comma-separated list");
    return out;
  }

  /// Replaces (or adds) a key; used by parameter sweeps.
  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
  }

  /// Rejects keys outside the given whitelist so typos surface as errors
  /// naming the offending line rather than silently using a default.
  void check_known_keys(const std::vector<std::string>& known) const {
    for (const auto& key : order_) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        const auto it = lines_.find(key);
        const std::string at =
            it == lines_.end() ? "" : " line " + std::to_string(it->second);
        throw config_error(origin_ + at + ": unknown field `" + key + "`");
      }
    }
  }

  /// Canonical `key = value` text in file order; hashing this ties outputs
  /// to the exact configuration that produced them.
  std::string canonical() const {
    std::string s;
    for (const auto& key : order_)
      s += key + " = " + values_.at(key) + "\n";
    return s;
  }

  std::uint64_t hash() const { return fnv1a64(canonical()); }

  const std::string& origin() const { return origin_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  double parse_double(const std::string& v, const std::string& key) const {
    std::size_t pos = 0;
    double r = 0;
    try {
      r = std::stod(v, &pos);
    } catch (const std::exception&) {
      fail(key, "expected a number, got `" + v + "`");
    }
    if (pos != v.size()) fail(key, "expected a number, got `" + v + "`");
    if (!std::isfinite(r)) fail(key, "value must be finite");
    return r;
  }

  [[noreturn]] void fail(const std::string& key,
                         const std::string& what) const {
    const auto it = lines_.find(key);
    const std::string at =
        it == lines_.end() ? "" : " line " + std::to_string(it->second);
    throw config_error(origin_ + at + ": field `" + key + "`: " + what);
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::vector<std::string> order_;
};

/// Validates `grid.m`: a power of two in [16, 512], the sizes whose dyadic
/// probe radii land exactly on grid nodes.
inline index_t grid_m_from(const Config& cfg, index_t fallback) {
  const long long m = cfg.get_int("grid.m", fallback);
  if (m < 16 || m > 512 || !is_power_of_two(static_cast<index_t>(m)))
    throw config_error(cfg.origin() +
                       ": field `grid.m`: must be a power of two in "
                       "[16, 512], got " +
                       std::to_string(m));
  return static_cast<index_t>(m);
}

}  // namespace ellreg
