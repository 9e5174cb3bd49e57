#include "tdlab/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tdlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
  bool in_quote = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quote = !in_quote;
    if (s[i] == '#' && !in_quote) return s.substr(0, i);
  }
  return s;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
  ConfigFile cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    if (section.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": key outside a section");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse(in);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

bool ConfigFile::has_section(const std::string& section) const { return sections_.count(section) > 0; }

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) throw std::runtime_error("config: missing section [" + section + "]");
  auto k = s->second.find(key);
  if (k == s->second.end()) throw std::runtime_error("config: missing key " + section + "." + key);
  return k->second;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::runtime_error("config: " + section + "." + key + " is not a number: " + v);
  return d;
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  std::size_t pos = 0;
  const long long i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::runtime_error("config: " + section + "." + key + " is not an integer: " + v);
  return i;
}

std::int64_t ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_uint_or(const std::string& section, const std::string& key,
                                      std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoull(get(section, key));
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: " + section + "." + key + " is not a bool: " + v);
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key) const {
  std::string v = get(section, key);
  for (auto& c : v) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(v);
  std::vector<double> out;
  double d;
  while (is >> d) out.push_back(d);
  if (!is.eof()) throw std::runtime_error("config: " + section + "." + key + " is not a number list");
  return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& section, const std::string& key) const {
  std::string v = get(section, key);
  for (auto& c : v) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(v);
  std::vector<int> out;
  int i;
  while (is >> i) out.push_back(i);
  if (!is.eof()) throw std::runtime_error("config: " + section + "." + key + " is not an integer list");
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

std::string ConfigFile::canonical() const {
  std::ostringstream out;
  for (const auto& [section, keys] : sections_) {
    for (const auto& [key, value] : keys) {
      out << section << "." << key << " = " << value << "\n";
    }
  }
  return out.str();
}

std::uint64_t ConfigFile::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string ConfigFile::hash_hex() const {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash();
  return out.str();
}

std::string resolve_config_path(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return name_or_path;
  const fs::path preset = fs::path(TDLAB_PRESET_DIR) / (name_or_path + ".toml");
  if (fs::exists(preset)) return preset.string();
  throw std::runtime_error("config not found: " + name_or_path + " (also tried " + preset.string() + ")");
}

}  // namespace tdlab
