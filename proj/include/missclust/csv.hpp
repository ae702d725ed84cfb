#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "missclust/matrix.hpp"

namespace missclust {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline bool is_blank(const std::string& s) {
  for (char ch : s)
    if (ch != ' ' && ch != '\t') return false;
  return true;
}

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::runtime_error(context + ": cannot parse number from '" + s + "'");
  return v;
}

}  // namespace detail

struct CsvData {
  std::vector<std::string> columns;  // retained column names, in file order
  MaskedMatrix data;                 // empty fields become unobserved entries
};

// Reads a headered CSV of numbers. Empty (or whitespace-only) fields are
// missing values; columns named in exclude_columns are dropped before the
// matrix is built.
inline CsvData load_csv_matrix(const std::string& path,
                               const std::vector<std::string>& exclude_columns = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv_matrix: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_csv_matrix: '" + path + "' is empty");
  const auto headers = detail::split_csv_line(line);

  std::vector<std::size_t> keep;
  std::vector<std::string> columns;
  for (std::size_t j = 0; j < headers.size(); ++j) {
    bool excluded = false;
    for (const auto& ex : exclude_columns)
      if (headers[j] == ex) {
        excluded = true;
        break;
      }
    if (!excluded) {
      keep.push_back(j);
      columns.push_back(headers[j]);
    }
  }
  if (keep.empty())
    throw std::runtime_error("load_csv_matrix: '" + path + "' has no columns after exclusions");

  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != headers.size())
      throw std::runtime_error("load_csv_matrix: '" + path + "' row " +
                               std::to_string(n_rows + 2) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(headers.size()));
    for (std::size_t j : keep) {
      if (detail::is_blank(fields[j])) {
        values.push_back(0.0);
        mask.push_back(0);
      } else {
        values.push_back(detail::parse_double(
            fields[j], "load_csv_matrix: '" + path + "' row " + std::to_string(n_rows + 2) +
                           " column '" + headers[j] + "'"));
        mask.push_back(1);
      }
    }
    ++n_rows;
  }
  if (n_rows == 0) throw std::runtime_error("load_csv_matrix: '" + path + "' has no data rows");

  Matrix m(n_rows, keep.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.data()[i] = values[i];
  return CsvData{.columns = std::move(columns),
                 .data = MaskedMatrix(std::move(m), std::move(mask))};
}

}  // namespace missclust
