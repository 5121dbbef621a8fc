#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace compsum::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyInfo {
  std::string name;
  std::string default_value;
  std::string help;
};

// Flat "key = value" lines. '#' starts a comment; blank lines are skipped.
// Keys may use dotted namespaces (adv.rho). Duplicates are errors.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config parse_file(const std::string& path);

  // Command-line override; replaces any file value.
  void set(const std::string& key, const std::string& value);

  // Throws ConfigError naming the first unknown key and listing valid keys.
  void check_keys(const std::vector<KeyInfo>& allowed) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated reals.
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<long long> get_int_list(const std::string& key,
                                      const std::vector<long long>& fallback) const;

  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    int line;  // 0 for command-line overrides
  };

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  const Entry* find(const std::string& key) const;

  std::string source_ = "<none>";
  std::map<std::string, Entry> entries_;
};

// Parses a real with std::from_chars; accepts "inf".
bool parse_double(const std::string& text, double& out);

}  // namespace compsum::cli
