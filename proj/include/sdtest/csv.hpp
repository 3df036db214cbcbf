// csv.hpp
//
// Minimal CSV writing and reading for the artifact's own outputs. Fields
// never contain commas or quotes, so no quoting is performed on output;
// the reader accepts double-quoted fields anyway.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sdtest/error.hpp"

#ifndef SDTEST_VERSION
#define SDTEST_VERSION "0.1.0"
#endif

namespace sdtest {

inline const char* version() noexcept { return SDTEST_VERSION; }

/// Shortest round-trippable rendering is not needed; 12 significant digits
/// are stable across platforms and plenty for Monte Carlo output.
inline std::string format_number(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class CsvRow {
 public:
  CsvRow& add(const std::string& s) {
    fields_.push_back(s);
    return *this;
  }
  CsvRow& add(const char* s) { return add(std::string(s)); }
  CsvRow& add(double v) { return add(format_number(v)); }
  CsvRow& add(std::int64_t v) { return add(std::to_string(v)); }
  CsvRow& add(int v) { return add(std::to_string(v)); }
  CsvRow& add(std::uint64_t v) { return add(std::to_string(v)); }
  CsvRow& add(bool v) { return add(std::string(v ? "1" : "0")); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) out += ',';
      out += fields_[i];
    }
    return out;
  }
  std::size_t size() const noexcept { return fields_.size(); }

 private:
  std::vector<std::string> fields_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError(where + ": unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

}  // namespace detail

/// Reads a CSV with a header row. Errors name the file and 1-based line.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line, where);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw ParseError(where + ": expected " + std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError(path + ":1: missing header row");
  return table;
}

/// Parses a number field of a CSV; "inf" and "nan" are accepted.
inline double csv_number(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + field + "' is not a number");
  }
  if (used != field.size()) throw ParseError(where + ": '" + field + "' is not a number");
  return v;
}

}  // namespace sdtest
