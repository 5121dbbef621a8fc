#include "compsum_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace compsum::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf" || t == "infinity") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && !std::isnan(out);
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value', got '" +
                        body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!valid_key(key)) {
      throw ConfigError(source + ":" + std::to_string(line) + ": invalid key '" + key + "'");
    }
    if (auto it = c.entries_.find(key); it != c.entries_.end()) {
      throw ConfigError(source + ":" + std::to_string(line) + ": key '" + key +
                        "' already set on line " + std::to_string(it->second.line));
    }
    c.entries_[key] = {value, line};
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = {value, 0};
}

void Config::check_keys(const std::vector<KeyInfo>& allowed) const {
  for (const auto& [key, entry] : entries_) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const KeyInfo& k) { return k.name == key; });
    if (known) continue;
    std::string list;
    for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k.name;
    const std::string where =
        entry.line > 0 ? source_ + ":" + std::to_string(entry.line) : std::string("command line");
    throw ConfigError(where + ": unknown key '" + key + "'; valid keys: " + list);
  }
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const Config::Entry* Config::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void Config::fail(const std::string& key, const std::string& what) const {
  const Entry* e = find(key);
  const std::string where = e && e->line > 0 ? source_ + ":" + std::to_string(e->line)
                                             : std::string("command line");
  throw ConfigError(where + ": key '" + key + "': " + what);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, v)) fail(key, "expected a real number, got '" + e->value + "'");
  return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  long long v = 0;
  const char* b = e->value.data();
  const char* end = b + e->value.size();
  auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || ptr != end) fail(key, "expected an integer, got '" + e->value + "'");
  return v;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const char* b = e->value.data();
  const char* end = b + e->value.size();
  auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || ptr != end) {
    fail(key, "expected a nonnegative integer, got '" + e->value + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    double v = 0.0;
    if (!parse_double(item, v)) fail(key, "expected a list of reals, got item '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

std::vector<long long> Config::get_int_list(const std::string& key,
                                            const std::vector<long long>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<long long> out;
  for (const auto& item : split_list(e->value)) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      fail(key, "expected a list of integers, got item '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

}  // namespace compsum::cli
