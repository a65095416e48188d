#include "hetfair/kvconfig.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hetfair {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

KvConfig KvConfig::parse(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KvConfig::merge(const KvConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::optional<std::string> KvConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("config key `" + key + "`: cannot parse `" + text + "` as a number");
  }
  return value;
}

}  // namespace

double KvConfig::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = raw(key);
  return v ? parse_number<std::int64_t>(key, *v) : fallback;
}

std::uint64_t KvConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config key `" + key + "`: expected a boolean, got `" + *v + "`");
}

std::vector<double> KvConfig::get_doubles(const std::string& key,
                                          std::vector<double> fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError("config key `" + key + "`: empty list");
  return out;
}

std::vector<std::string> KvConfig::get_strings(const std::string& key,
                                               std::vector<std::string> fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  auto out = split_list(*v);
  if (out.empty()) throw ConfigError("config key `" + key + "`: empty list");
  return out;
}

std::vector<std::string> KvConfig::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

std::string KvConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace hetfair
