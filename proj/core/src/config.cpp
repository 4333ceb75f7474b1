#include "spdest/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>

#include "spdest/error.hpp"

namespace spdest {

namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* type) {
  throw ConfigError("config key '" + key + "': '" + value + "' is not a valid " + type);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "number");
  return out;
}

}  // namespace

FlatConfig FlatConfig::parse(std::istream& in, const std::string& origin) {
  FlatConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ':' << lineno << ": expected 'key = value'";
      throw ConfigError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << origin << ':' << lineno << ": empty key";
      throw ConfigError(msg.str());
    }
    if (cfg.entries_.count(key) != 0) {
      std::ostringstream msg;
      msg << origin << ':' << lineno << ": duplicate key '" << key << "'";
      throw ConfigError(msg.str());
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void FlatConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

const std::string* FlatConfig::find(const std::string& key) const {
  used_.insert(key);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

int FlatConfig::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  int out = 0;
  const char* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, *v, "integer");
  return out;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const char* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, *v, "unsigned integer");
  return out;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, *v, "boolean");
}

std::optional<double> FlatConfig::get_optional_double(const std::string& key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  return parse_double(key, *v);
}

std::vector<double> FlatConfig::get_double_list(const std::string& key,
                                                std::vector<double> fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::istringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) bad_value(key, *v, "list of numbers");
  return out;
}

std::vector<std::string> FlatConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (used_.count(k) == 0) out.push_back(k);
  }
  return out;
}

}  // namespace spdest
