#include "lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(trim(s.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

Config Config::parse(std::string_view text, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = cfg.source_ + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError(where + "invalid section name '" + std::string(name) + "'");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw ConfigError(where + "invalid key '" + std::string(key) + "'");
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (cfg.entries_.count(full)) throw ConfigError(where + "duplicate field '" + full + "'");
    cfg.entries_.emplace(std::move(full), Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::fail(const std::string& key, const std::string& what) const {
  const Entry* e = find(key);
  const std::string where = e ? source_ + ":" + std::to_string(e->line) : source_;
  throw ConfigError(where + ": field '" + key + "': " + what);
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

const Config::Entry& Config::require(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw ConfigError(source_ + ": missing required field '" + key + "'");
  return *e;
}

std::string Config::get_string(const std::string& key) const { return require(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double Config::get_real(const std::string& key) const {
  const auto v = parse_real(require(key).value);
  if (!v) fail(key, "expected a number, got '" + require(key).value + "'");
  return *v;
}

double Config::get_real(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

std::uint64_t Config::get_count(const std::string& key) const {
  const std::string& s = require(key).value;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(key, "expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t Config::get_count(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_count(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = require(key).value;
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> Config::get_reals(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (auto item : split_list(require(key).value)) {
    const auto v = parse_real(item);
    if (!v) fail(key, "bad number '" + std::string(item) + "' in list");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::pair<double, double>> Config::get_real_pairs(const std::string& key,
                                                              std::vector<std::pair<double, double>> fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::pair<double, double>> out;
  for (auto item : split_list(require(key).value)) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) fail(key, "expected 'a:b', got '" + std::string(item) + "'");
    const auto a = parse_real(item.substr(0, colon));
    const auto b = parse_real(item.substr(colon + 1));
    if (!a || !b) fail(key, "bad number in '" + std::string(item) + "'");
    out.emplace_back(*a, *b);
  }
  return out;
}

scorelab::GaussianMixture1D Config::get_mixture(const std::string& key) const {
  try {
    return scorelab::parse_mixture_record(require(key).value);
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

std::vector<std::string> Config::keys_in_section(const std::string& prefix) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  const std::string p = prefix + ".";
  for (const auto& [k, e] : entries_) {
    if (k.rfind(p, 0) == 0) found.emplace_back(e.line, k.substr(p.size()));
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

void Config::check_all_used() const {
  const Entry* first = nullptr;
  std::string name;
  for (const auto& [k, e] : entries_) {
    if (!e.used && (!first || e.line < first->line)) {
      first = &e;
      name = k;
    }
  }
  if (first) throw ConfigError(source_ + ":" + std::to_string(first->line) + ": unknown field '" + name + "'");
}

}  // namespace lab
