// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Result tables and their serializations: RFC-4180 CSV and JSON lines.
// Cells are strings; numeric formatting is the caller's business so that
// written output is reproducible byte for byte.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpmimo/errors.hpp"

namespace dpmimo {

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw InvariantViolation("result table: row width mismatch");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const ResultTable& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << detail::csv_escape(t.columns[i]);
  os << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << detail::csv_escape(row[i]);
    os << "\r\n";
  }
}

// One JSON object per line, keys in column order; numeric-looking cells
// stay strings deliberately (lossless round trip).
inline void write_jsonl(std::ostream& os, const ResultTable& t) {
  for (const auto& row : t.rows) {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < t.columns.size(); ++i) j[t.columns[i]] = row[i];
    os << j.dump() << "\n";
  }
}

inline void write_table(const std::string& path, const ResultTable& t,
                        const std::string& format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("out", "cannot open '" + path + "' for writing");
  if (format == "csv") write_csv(os, t);
  else if (format == "json") write_jsonl(os, t);
  else throw ConfigError("format", "expected 'csv' or 'json'");
}

// Shortest round-trippable decimal representation.
inline std::string fmt_double(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(0) << v;
    return t.str();
  }
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string s = os.str();
  // Prefer a shorter form when it round-trips exactly.
  for (int prec = 1; prec < 17; ++prec) {
    std::ostringstream t;
    t << std::setprecision(prec) << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return s;
}

// FNV-1a over the canonical (sorted-key) dump of a JSON config.
inline std::string config_hash(const nlohmann::json& cfg) {
  const std::string s = cfg.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << h;
  return os.str();
}

}  // namespace dpmimo
