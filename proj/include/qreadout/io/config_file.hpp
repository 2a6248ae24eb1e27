#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qreadout::io {

/// `key = value` lines; '#' starts a comment; blank lines are ignored.
/// Lookups mark keys as used so leftovers can be reported as typos.
class ConfigFile {
 public:
  static ConfigFile load(const std::filesystem::path& path);
  static ConfigFile parse(const std::string& text, const std::string& source = "<config>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::uint64_t> get_u64(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  /// Comma-separated numbers.
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

  /// Keys never looked up, in file order.
  std::vector<std::string> unused() const;
  /// Throws UsageError naming the first unused key.
  void reject_unused() const;

  const std::string& source() const { return source_; }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& why) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  std::vector<std::string> order_;
  mutable std::set<std::string> used_;
};

/// Shared number parsing for config files and CLI lists.
double parse_double(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

}  // namespace qreadout::io
