#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rrc/types.hpp"

namespace rrc {

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& path, Index row, Index col,
              const std::string& what)
      : std::runtime_error(path + ": row " + std::to_string(row) + ", column " +
                           std::to_string(col) + ": " + what),
        row_(row),
        col_(col) {}
  parse_error(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), row_(0), col_(0) {}

  Index row() const { return row_; }
  Index col() const { return col_; }

 private:
  Index row_, col_;
};

// Response coding rules; exactly one is active per read.
struct ResponseCoding {
  enum class Rule { Native, ZeroOne, Threshold };
  Rule rule = Rule::Native;
  double threshold = 0.0;              // values > threshold map to +1
  std::string missing_token = "NA";
};

namespace detail {

inline std::string trim(std::string_view text) {
  const char* ws = " \t\r";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return "";
  const auto end = text.find_last_not_of(ws);
  return std::string(text.substr(begin, end - begin + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;  // from_chars rejects an explicit plus
  if (first == last) return std::nullopt;
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) return std::nullopt;
  return value;
}

inline std::vector<std::vector<std::string>> read_csv_cells(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error(path, "cannot open file");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof() &&
        !rows.empty())
      break;  // trailing newline
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw parse_error(path, "empty file");
  const std::size_t width = rows.front().size();
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw parse_error(path, Index(r + 1), Index(rows[r].size()),
                        "ragged row: expected " + std::to_string(width) +
                            " cells, found " + std::to_string(rows[r].size()));
  return rows;
}

// A row counts as a header when no cell looks like data (numeric, missing
// token, or empty).
inline bool is_header_row(const std::vector<std::string>& cells,
                          const std::string& missing_token) {
  for (const auto& cell : cells) {
    if (cell.empty() || cell == missing_token) return false;
    if (parse_number(cell)) return false;
  }
  return true;
}

}  // namespace detail

// Rectangular numeric CSV with an optional auto-detected header row.
// Rejects non-finite values.
inline Matrixd read_numeric_csv(const std::string& path) {
  const auto rows = detail::read_csv_cells(path);
  const std::size_t first_data = detail::is_header_row(rows.front(), "") ? 1 : 0;
  if (rows.size() == first_data) throw parse_error(path, "no data rows");
  const Index n = Index(rows.size() - first_data);
  const Index p = Index(rows.front().size());
  Matrixd out(n, p);
  for (Index i = 0; i < n; ++i) {
    const auto& cells = rows[std::size_t(i) + first_data];
    for (Index j = 0; j < p; ++j) {
      const auto value = detail::parse_number(cells[std::size_t(j)]);
      if (!value)
        throw parse_error(path, Index(i + 1 + Index(first_data)), j + 1,
                          "cannot parse '" + cells[std::size_t(j)] +
                              "' as a number");
      if (!std::isfinite(*value))
        throw parse_error(path, Index(i + 1 + Index(first_data)), j + 1,
                          "non-finite value");
      out(i, j) = *value;
    }
  }
  return out;
}

inline Matrixd read_design_csv(const std::string& path) {
  return read_numeric_csv(path);
}

// Binary response CSV. Cells are numeric, the missing token, or empty
// (treated as missing). The active coding rule maps numeric cells to labels:
// native requires -1/+1, zero-one maps {0,1}, threshold maps via
// value > threshold.
inline ResponseMatrix read_response_csv(const std::string& path,
                                        const ResponseCoding& coding = {}) {
  const auto rows = detail::read_csv_cells(path);
  const std::size_t first_data =
      detail::is_header_row(rows.front(), coding.missing_token) ? 1 : 0;
  if (rows.size() == first_data) throw parse_error(path, "no data rows");
  const Index n = Index(rows.size() - first_data);
  const Index q = Index(rows.front().size());

  LabelMatrix labels = LabelMatrix::Constant(n, q, std::int8_t(-1));
  BoolArray observed = BoolArray::Constant(n, q, false);
  for (Index i = 0; i < n; ++i) {
    const auto& cells = rows[std::size_t(i) + first_data];
    for (Index k = 0; k < q; ++k) {
      const std::string& cell = cells[std::size_t(k)];
      const Index file_row = i + 1 + Index(first_data);
      if (cell.empty() || cell == coding.missing_token) continue;
      const auto value = detail::parse_number(cell);
      if (!value)
        throw parse_error(path, file_row, k + 1,
                          "cannot parse '" + cell + "' as a number");
      std::int8_t label = 0;
      switch (coding.rule) {
        case ResponseCoding::Rule::Native:
          if (*value == 1.0) label = 1;
          else if (*value == -1.0) label = -1;
          else
            throw parse_error(path, file_row, k + 1,
                              "native coding expects -1 or +1, found '" +
                                  cell + "'");
          break;
        case ResponseCoding::Rule::ZeroOne:
          if (*value == 1.0) label = 1;
          else if (*value == 0.0) label = -1;
          else
            throw parse_error(path, file_row, k + 1,
                              "zero-one coding expects 0 or 1, found '" +
                                  cell + "'");
          break;
        case ResponseCoding::Rule::Threshold:
          label = *value > coding.threshold ? 1 : -1;
          break;
      }
      labels(i, k) = label;
      observed(i, k) = true;
    }
  }
  ObservationMask mask((std::move(observed)));
  if (mask.empty()) throw parse_error(path, "no observed response entries");
  return ResponseMatrix(std::move(labels), std::move(mask));
}

// 17 significant digits: lossless for 64-bit floats and locale-independent.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

inline void write_matrix_csv(const std::string& path, const Matrixd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error(path, "cannot open file for writing");
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
}

inline void write_labels_csv(const std::string& path,
                             const LabelMatrix& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error(path, "cannot open file for writing");
  for (Index i = 0; i < labels.rows(); ++i) {
    for (Index k = 0; k < labels.cols(); ++k) {
      if (k) out << ',';
      out << int(labels(i, k));
    }
    out << '\n';
  }
}

inline Matrixd read_coefficients_csv(const std::string& path) {
  return read_numeric_csv(path);
}

}  // namespace rrc
