#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "esv/common.hpp"

namespace esv {

struct Table {
  std::vector<std::string> names;
  std::vector<FeatureVector> rows;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace detail

// CSV with a header row naming features; each subsequent row one vector.
inline Table parse_csv(std::istream& in, const std::string& origin) {
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (t.names.empty()) {
      t.names = cells;
      continue;
    }
    if (cells.size() != t.names.size()) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.names.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    FeatureVector row;
    row.reserve(cells.size());
    for (const std::string& c : cells) {
      char* end = nullptr;
      double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": bad number \"" + c + "\"");
      }
      row.push_back(v);
    }
    require_finite(row, (origin + ":" + std::to_string(lineno)).c_str());
    t.rows.push_back(std::move(row));
  }
  if (t.names.empty()) throw ParseError(origin + ": missing header row");
  return t;
}

inline Table read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return parse_csv(f, path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace esv
