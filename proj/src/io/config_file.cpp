#include "qreadout/io/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qreadout/errors.hpp"

namespace qreadout::io {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw UsageError("not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_double(s));
  return out;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(source + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key)) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
    cfg.order_.push_back(key);
  }
  return cfg;
}

void ConfigFile::bad(const std::string& key, const std::string& why) const {
  throw UsageError(source_ + ":" + std::to_string(lines_.at(key)) + ": " + key + ": " + why);
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return parse_double(*v);
  } catch (const UsageError&) {
    bad(key, "expected a number, got '" + *v + "'");
  }
}

std::optional<std::uint64_t> ConfigFile::get_u64(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (v->empty() || res.ec != std::errc{} || res.ptr != v->data() + v->size()) {
    bad(key, "expected a non-negative integer, got '" + *v + "'");
  }
  return out;
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad(key, "expected true or false, got '" + *v + "'");
}

std::optional<std::vector<double>> ConfigFile::get_doubles(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return parse_double_list(*v);
  } catch (const UsageError&) {
    bad(key, "expected a comma-separated list of numbers, got '" + *v + "'");
  }
}

std::optional<std::vector<std::string>> ConfigFile::get_strings(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  return split_list(*v);
}

std::vector<std::string> ConfigFile::unused() const {
  std::vector<std::string> out;
  for (const auto& k : order_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

void ConfigFile::reject_unused() const {
  const auto u = unused();
  if (!u.empty()) bad(u.front(), "unknown key");
}

}  // namespace qreadout::io
