#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scorelab/mixture.hpp"

namespace lab {

/// Invalid configuration; the message carries source, line and field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration.  `[section]` headers prefix the keys
/// that follow with `section.`; `#` starts a comment.
class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& source() const { return source_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  std::uint64_t get_count(const std::string& key) const;
  std::uint64_t get_count(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_reals(const std::string& key, std::vector<double> fallback) const;
  /// Comma-separated `a:b` items.
  std::vector<std::pair<double, double>> get_real_pairs(const std::string& key,
                                                        std::vector<std::pair<double, double>> fallback) const;
  scorelab::GaussianMixture1D get_mixture(const std::string& key) const;

  /// Keys under `prefix.` in file order, with the prefix stripped.
  std::vector<std::string> keys_in_section(const std::string& prefix) const;

  /// Throws on any key that no getter has read.
  void check_all_used() const;

  /// Error for `key` with its line number attached.
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line;
    mutable bool used = false;
  };
  const Entry* find(const std::string& key) const;
  const Entry& require(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Parses a decimal; returns nullopt unless the whole string is consumed.
std::optional<double> parse_real(std::string_view s);

}  // namespace lab
