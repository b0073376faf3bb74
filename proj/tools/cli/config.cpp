#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fracvar::cli {

namespace {

std::string describe(const std::string& source, int line, const std::string& field, const std::string& message) {
  std::string text = source;
  if (line > 0) text += ":" + std::to_string(line);
  text += ": ";
  if (!field.empty()) text += "field '" + field + "': ";
  return text + message;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '.' || c == '-';
    if (!ok) return false;
  }
  return key.find("..") == std::string_view::npos;
}

std::string json_scalar(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  if (value.is_number_float()) {
    char buffer[64];
    const auto r = std::to_chars(buffer, buffer + sizeof buffer, value.get<double>());
    return std::string(buffer, r.ptr);
  }
  return {};
}

void flatten(const nlohmann::json& node, const std::string& prefix, Config& out, const std::string& source) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!valid_key(key)) throw ConfigError(source, 0, key, "invalid key");
    const auto& value = it.value();
    if (value.is_object()) {
      flatten(value, key, out, source);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!(item.is_number() || item.is_string())) throw ConfigError(source, 0, key, "arrays may hold numbers only");
        if (!joined.empty()) joined += ",";
        joined += json_scalar(item);
      }
      out.set(key, joined);
    } else if (value.is_null()) {
      throw ConfigError(source, 0, key, "null is not a value");
    } else {
      out.set(key, json_scalar(value));
    }
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& field, const std::string& message)
    : InputError(describe(source, line, field, message)), line_(line), field_(field) {}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> parts;
  if (trim(text).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.emplace_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

Config Config::parse_text(std::string_view text, const std::string& source) {
  Config config(source);
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "", "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!valid_key(key)) throw ConfigError(source, line_no, key, "invalid key");
    if (value.empty()) throw ConfigError(source, line_no, key, "empty value");
    if (config.has(key)) throw ConfigError(source, line_no, key, "duplicate key");
    config.set(key, value, line_no);
  }
  return config;
}

Config Config::parse_json(std::string_view text, const std::string& source) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source, 0, "", std::string("invalid JSON: ") + e.what());
  }
  if (!document.is_object()) throw ConfigError(source, 0, "", "top-level JSON value must be an object");
  Config config(source);
  flatten(document, "", config, source);
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot read config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Config config = path.extension() == ".json" ? parse_json(buffer.str(), path.string())
                                              : parse_text(buffer.str(), path.string());
  config.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return config;
}

void Config::set(const std::string& key, const std::string& value, int line) {
  if (!valid_key(key)) throw ConfigError(source_, line, key, "invalid key");
  entries_[key] = Entry{value, line};
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_, 0, key, "missing required field");
  used_.insert(key);
  return it->second;
}

void Config::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  throw ConfigError(source_, it == entries_.end() ? 0 : it->second.line, key, message);
}

void Config::require(const std::string& key) const { entry(key); }

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const auto value = parse_number(entry(key).value);
  if (!value) fail(key, "expected a finite number, got '" + entry(key).value + "'");
  return *value;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string& text = entry(key).value;
  int value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) fail(key, "expected an integer, got '" + text + "'");
  return value;
}

int Config::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& text = entry(key).value;
  std::uint64_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    fail(key, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& text = entry(key).value;
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(key, "expected true or false, got '" + text + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> values;
  for (const auto& part : split_list(entry(key).value)) {
    const auto value = parse_number(part);
    if (!value) fail(key, "expected a comma-separated list of numbers, got '" + part + "'");
    values.push_back(*value);
  }
  return values;
}

void Config::reject_unused() const {
  for (const auto& [key, e] : entries_) {
    if (used_.count(key) == 0) throw ConfigError(source_, e.line, key, "unknown or unused field");
  }
}

std::map<std::string, std::string> Config::entries() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, e] : entries_) out.emplace(key, e.value);
  return out;
}

}  // namespace fracvar::cli
