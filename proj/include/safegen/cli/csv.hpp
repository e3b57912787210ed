#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "safegen/cli/config.hpp"

namespace safegen::cli {

/// Fixed formatting so reruns produce identical bytes.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

/// Commas and line breaks are not allowed inside fields.
inline std::string field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ConfigError("csv: missing column '" + name + "'");
  }

  std::string text() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  static CsvTable parse(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::string cell;
      std::istringstream ls(line);
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (line.back() == ',') cells.emplace_back();
      if (first) {
        t.header = cells;
        first = false;
      } else {
        if (cells.size() != t.header.size()) throw ConfigError("csv: ragged row");
        t.rows.push_back(cells);
      }
    }
    return t;
  }

  /// Array of objects keyed by header. Numeric cells become numbers, empty
  /// cells null, everything else strings.
  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json o = nlohmann::json::object();
      for (size_t i = 0; i < header.size(); ++i) {
        const std::string& v = r[i];
        if (v.empty()) {
          o[header[i]] = nullptr;
          continue;
        }
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (end == v.c_str() + v.size() && std::isfinite(d))
          o[header[i]] = d;
        else
          o[header[i]] = v;
      }
      arr.push_back(std::move(o));
    }
    return arr;
  }
};

inline double cell_num(const std::string& s) {
  if (s.empty()) return std::nan("");
  return std::strtod(s.c_str(), nullptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace safegen::cli
