#pragma once

// Flat key = value run configuration with cosmetic [section] headers, plus a
// stable FNV-1a hash of the effective settings. Command-line flags override
// file values; the hash covers the merged result, so every CSV emitted from
// the same effective configuration carries the same provenance line.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow {

class RunConfig {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
    }
  }

  int get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config: key '" + key + "' is not an integer");
    return i;
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has a non-numeric list entry: " + item);
      }
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
    return out;
  }

  // FNV-1a 64-bit over the sorted effective key=value pairs. Execution
  // plumbing (thread count, cache and output locations) is excluded: it does
  // not influence the computed numbers, and runs differing only in plumbing
  // must carry the same provenance hash.
  std::uint64_t hash() const {
    static const std::set<std::string> plumbing = {
        "threads",    "cache_dir", "output_dir",   "output",
        "svg",        "trace_output", "z_output", "output_prefix"};
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
    };
    for (const auto& [k, v] : values_) {
      if (plumbing.count(k) != 0) continue;
      mix(k);
      mix("=");
      mix(v);
      mix("\n");
    }
    return h;
  }

  std::string hash_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return std::string(buf);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config: malformed section at " + path + ":" + std::to_string(lineno));
      continue;  // sections organize the file; keys are globally flat
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at " + path + ":" + std::to_string(lineno));
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at " + path + ":" + std::to_string(lineno));
    config.set(key, value);
  }
  return config;
}

}  // namespace backflow
