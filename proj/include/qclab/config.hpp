#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qclab {

/// Flat `section.key = value` text. `#` starts a comment; blank lines are
/// ignored; a key may appear once.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma separated list.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Resolves a path value: absolute paths as is, otherwise relative to the
  /// directory of the config file.
  std::filesystem::path get_path(const std::string& key) const;

  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  const std::string& origin() const noexcept { return origin_; }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// `key = value` lines in key order, overrides included.
  std::string render() const;

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  std::filesystem::path base_dir_ = ".";
  std::string origin_;
};

}  // namespace qclab
