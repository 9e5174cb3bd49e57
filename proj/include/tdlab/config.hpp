#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tdlab {

// Sectioned key = value text config:
//   [section]
//   key = value            # trailing comments allowed
// Values are kept as raw strings; typed accessors parse on demand. Lists
// are whitespace or comma separated. The hash covers the canonical
// (sorted) section.key = value form, so formatting and ordering do not
// change an experiment's identity.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in);
  static ConfigFile parse_string(const std::string& text);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint_or(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  bool has_section(const std::string& section) const;

  std::string canonical() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical form
  std::string hash_hex() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Locates a config: a path used as-is if it exists, otherwise
// <preset dir>/<name>.toml from the bundled presets.
std::string resolve_config_path(const std::string& name_or_path);

}  // namespace tdlab
