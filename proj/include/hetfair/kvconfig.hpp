#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetfair {

/// Raised for malformed or out-of-range configuration. The CLI maps it to
/// exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored. Later assignments override earlier ones.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Overlays every key of `other` onto this config.
  void merge(const KvConfig& other);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

  /// Keys not in `known`; used to reject typos.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  std::string to_string() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::optional<std::string> raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');
std::string trim(const std::string& s);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

}  // namespace hetfair
