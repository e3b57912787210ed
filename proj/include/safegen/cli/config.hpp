#pragma once

// Sectioned key = value configuration.
//
//   # comment
//   [section]
//   key = value            lists are comma separated
//
// Later layers override earlier ones; every value remembers where it came
// from so errors can point at a file and line.

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace safegen::cli {

/// Usage or configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line", "--set", "preset desk", ...
  };

  static Config parse(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw ConfigError(where + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      c.sections_[section][key] = {trim(line.substr(eq + 1)), where};
    }
    return c;
  }

  /// `section.key=value`
  void set_override(const std::string& assignment, const std::string& origin) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError(origin + ": expected section.key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        trim(assignment.substr(eq + 1)), origin);
  }

  void set(const std::string& section, const std::string& key, const std::string& value, const std::string& origin) {
    sections_[section][key] = {value, origin};
  }

  void merge(const Config& over) {
    for (const auto& [s, kv] : over.sections_)
      for (const auto& [k, e] : kv) sections_[s][k] = e;
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key);
  }

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

  const Entry& entry(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
      throw ConfigError("config: missing key [" + section + "] " + key);
    return s->second.at(key);
  }

  std::string str(const std::string& section, const std::string& key) const { return entry(section, key).value; }

  std::string str(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? str(section, key) : fallback;
  }

  double num(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    return to_double(e.value, field_context(section, key, e));
  }

  double num(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? num(section, key) : fallback;
  }

  long integer(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    long v = 0;
    const auto* b = e.value.data();
    const auto r = std::from_chars(b, b + e.value.size(), v);
    if (r.ec != std::errc() || r.ptr != b + e.value.size())
      throw ConfigError(field_context(section, key, e) + ": expected an integer, got '" + e.value + "'");
    return v;
  }

  long integer(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const Entry& e = entry(section, key);
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(field_context(section, key, e) + ": expected true or false, got '" + e.value + "'");
  }

  std::vector<std::string> list(const std::string& section, const std::string& key) const {
    const std::string v = str(section, key);
    if (v.empty()) return {};
    return split(v, ',');
  }

  std::vector<double> nums(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const Entry& e = entry(section, key);
    for (const std::string& s : list(section, key)) out.push_back(to_double(s, field_context(section, key, e)));
    return out;
  }

  /// Rejects keys of `section` not listed in `allowed`.
  void check_keys(const std::string& section, const std::set<std::string>& allowed) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [k, e] : s->second)
      if (!allowed.count(k)) throw ConfigError(e.origin + ": unknown key '" + k + "' in [" + section + "]");
  }

  /// Canonical text: sections and keys sorted, no comments.
  std::string text() const {
    std::string out;
    for (const auto& [s, kv] : sections_) {
      if (!out.empty()) out += '\n';
      out += "[" + s + "]\n";
      for (const auto& [k, e] : kv) out += k + " = " + e.value + "\n";
    }
    return out;
  }

  Config section_only(const std::set<std::string>& keep) const {
    Config c;
    for (const auto& [s, kv] : sections_)
      if (keep.count(s)) c.sections_[s] = kv;
    return c;
  }

 private:
  static std::string field_context(const std::string& section, const std::string& key, const Entry& e) {
    return e.origin + ": [" + section + "] " + key;
  }

  static double to_double(const std::string& s, const std::string& ctx) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
      throw ConfigError(ctx + ": expected a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace safegen::cli
