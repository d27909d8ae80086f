#pragma once

// Experiment config files.
//
// INI-style text with three kinds of sections:
//
//   [environment]        name = sis_network | game_network | linear | ucb_breaker | lower_bound
//   [algorithm.<label>]  type = uecb | uecb_noiseless | naive | ucb | exp3 | rexp3
//   [run]                horizon, seeds, master_seed, out, workers, ...
//
// Lines starting with ';' or '#' are comments. Lists are comma separated.
// Every key must be consumed by the component it configures; leftovers are
// reported as errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eqbandit/errors.hpp"

namespace eqbandit {

/// Key/value pairs of one section with typed accessors. Accessed keys are
/// remembered so `finish()` can reject the rest.
class Params {
 public:
  Params() = default;
  Params(std::string section, std::map<std::string, std::string> values)
      : section_(std::move(section)), values_(std::move(values)) {}

  const std::string& section() const { return section_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key) {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(where(key) + ": missing required key");
    return it->second;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : (used_.insert(key), fallback);
  }

  double number(const std::string& key) { return to_double(key, text(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }

  std::int64_t integer(const std::string& key) { return to_int(key, text(key)); }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    return has(key) ? integer(key) : (used_.insert(key), fallback);
  }

  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const std::string v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where(key) + ": expected a boolean, got '" + v + "'");
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split(text(key))) out.push_back(to_double(key, item));
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    return has(key) ? numbers(key) : (used_.insert(key), fallback);
  }

  std::vector<std::int64_t> integers(const std::string& key) {
    std::vector<std::int64_t> out;
    for (const auto& item : split(text(key))) out.push_back(to_int(key, item));
    return out;
  }

  /// Throws when a key was never read.
  void finish() const {
    std::string unknown;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw ConfigError("[" + section_ + "]: unknown keys: " + unknown);
  }

 private:
  std::string where(const std::string& key) const { return "[" + section_ + "] " + key; }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  }

  double to_double(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(where(key) + ": expected a number, got '" + v + "'");
  }

  std::int64_t to_int(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const long long d = std::stoll(v, &pos);
      if (pos == v.size()) return d;
    } catch (const std::exception&) {
    }
    // Allow integral scientific notation such as 5e4.
    const double d = to_double(key, v);
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
  }

  std::string section_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

struct ConfigFile {
  std::string source;  ///< raw text, hashed into the metadata
  Params environment;
  std::vector<std::pair<std::string, Params>> algorithms;  ///< (label, params) in file order
  Params run;
};

inline ConfigFile parse_config_text(const std::string& text) {
  std::stringstream cleaned;
  {
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b != std::string::npos && line[b] == '#') continue;
      cleaned << line << '\n';
    }
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }

  ConfigFile cfg;
  cfg.source = text;
  bool have_env = false;
  std::set<std::string> labels;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError("config: key '" + name + "' outside any section");
    std::map<std::string, std::string> values;
    for (const auto& [k, v] : section) {
      if (!v.empty()) throw ConfigError("config: nested key in [" + name + "]");
      values[k] = v.data();
    }
    if (name == "environment") {
      cfg.environment = Params(name, std::move(values));
      have_env = true;
    } else if (name == "run") {
      cfg.run = Params(name, std::move(values));
    } else if (name.rfind("algorithm.", 0) == 0 && name.size() > 10) {
      const std::string label = name.substr(10);
      if (!labels.insert(label).second) throw ConfigError("config: duplicate section [" + name + "]");
      cfg.algorithms.emplace_back(label, Params(name, std::move(values)));
    } else {
      throw ConfigError("config: unknown section [" + name + "]");
    }
  }
  if (!have_env) throw ConfigError("config: missing [environment] section");
  if (cfg.run.section().empty()) cfg.run = Params("run", {});
  return cfg;
}

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// 64-bit FNV-1a, used to fingerprint config text in the metadata.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string format_hash(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

}  // namespace eqbandit
