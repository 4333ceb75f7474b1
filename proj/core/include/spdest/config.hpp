#pragma once

#include <iosfwd>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spdest {

/// Flat `section.key = value` text. `#` starts a comment; blank lines are
/// ignored; a repeated key is an error. Typed getters record which keys were
/// read so that leftovers (typos) can be reported.
class FlatConfig {
 public:
  static FlatConfig parse(std::istream& in, const std::string& origin = "<config>");
  static FlatConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

  /// Keys never read by a getter, in sorted order.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace spdest
