#pragma once

// Flat run configuration: dotted keys mapped to text values.
//
// Text form, one entry per line:
//   # comment
//   model.name = sierpinski
//   solver.p   = 3
// A file whose extension is .json is read as a JSON object instead; nested
// objects become dotted keys and arrays become comma-separated lists.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fracvar/errors.hpp"

namespace fracvar::cli {

/// A validation failure that points at a config line and/or field.
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

class Config {
 public:
  Config() = default;
  explicit Config(std::string source) : source_(std::move(source)) {}

  static Config parse_text(std::string_view text, const std::string& source = "<config>");
  static Config parse_json(std::string_view text, const std::string& source = "<config>");
  /// Picks the format from the extension. Throws ConfigError if unreadable.
  static Config load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  /// Directory that relative file references are resolved against.
  const std::filesystem::path& base_dir() const { return base_dir_; }

  /// Adds or replaces an entry; line 0 marks an override from the command line.
  void set(const std::string& key, const std::string& value, int line = 0);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws a ConfigError built from the entry's line and key.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  /// Throws unless key is present.
  void require(const std::string& key) const;
  /// Throws for the first key not read so far (misspelled fields).
  void reject_unused() const;

  /// All entries in key order.
  std::map<std::string, std::string> entries() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  const Entry& entry(const std::string& key) const;

  std::string source_ = "<config>";
  std::filesystem::path base_dir_ = ".";
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

/// Strict number parsing: the whole text must be consumed.
std::optional<double> parse_number(std::string_view text);
/// Splits on commas and trims each part; an empty text gives no parts.
std::vector<std::string> split_list(std::string_view text);

}  // namespace fracvar::cli
