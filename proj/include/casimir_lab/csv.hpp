#pragma once

// Minimal reader for the numeric CSV files used by the library: one header
// row naming the columns, `#` comment lines and blank lines ignored,
// every data cell a floating-point number.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "casimir_lab/error.hpp"

namespace casimir_lab::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row, 1-based
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline double parse_number(std::string_view cell, std::size_t line) {
  double v = 0.0;
  // from_chars rejects a leading '+'.
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line) + ": not a number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads a table and checks that its header matches `expected` exactly.
inline Table read(std::istream& in, const std::vector<std::string>& expected) {
  Table t;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line);
    if (!have_header) {
      for (const auto c : cells) t.header.emplace_back(c);
      if (t.header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw DataError("line " + std::to_string(line_no) + ": expected header '" + want + "', got '" +
                        std::string(line) + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != expected.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected.size()) +
                      " columns, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto c : cells) row.push_back(detail::parse_number(c, line_no));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError("missing header row");
  return t;
}

inline Table read_file(const std::string& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return read(in, expected);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline Table read_string(const std::string& text, const std::vector<std::string>& expected) {
  std::istringstream in(text);
  return read(in, expected);
}

}  // namespace casimir_lab::csv
