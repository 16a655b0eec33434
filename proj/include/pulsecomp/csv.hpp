// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pulsecomp/errors.hpp"

namespace pulsecomp {

// Shortest decimal representation that round-trips the exact double
// (via std::to_chars); locale-independent, '.' separator.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw NumericError("failed to format a double");
  return std::string(buf, res.ptr);
}

inline std::string format_index(std::int64_t x) { return std::to_string(x); }

// Rectangular table with a header row; rows are preformatted strings so the
// byte-level output is fully determined before any IO happens.
struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) {
      throw DimensionError("row width must match the header");
    }
    rows.push_back(std::move(row));
  }
};

inline void write_csv(const std::filesystem::path& path, const ResultTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed while writing " + path.string());
}

}  // namespace pulsecomp
