#pragma once

// Count observations with covariates, read from CSV.
//
// Layout: a header row, one count column (default name "count"), an optional
// 0/1 column "censored" (1 means "at least `count` events"), and covariate
// columns. Cells of the form yes/no or true/false read as 1/0.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "renewal_count/error.hpp"

namespace renewal_count {

struct CountRow {
  unsigned count = 0;
  std::vector<double> covariates;
  bool censored = false;
};

struct CountData {
  std::vector<CountRow> rows;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return rows.size(); }

  std::optional<std::size_t> covariate_index(std::string_view name) const {
    const auto it = std::find(covariate_names.begin(), covariate_names.end(), name);
    if (it == covariate_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - covariate_names.begin());
  }

  unsigned max_count() const {
    unsigned m = 0;
    for (const auto& r : rows) m = std::max(m, r.count);
    return m;
  }

  /// Intercept-only data from a frequency table: freq[m] rows with count m.
  static CountData from_frequencies(const std::vector<std::size_t>& freq) {
    CountData d;
    for (std::size_t m = 0; m < freq.size(); ++m) {
      for (std::size_t i = 0; i < freq[m]; ++i) d.rows.push_back({static_cast<unsigned>(m), {}, false});
    }
    return d;
  }

  static CountData from_counts(const std::vector<unsigned>& counts) {
    CountData d;
    for (unsigned c : counts) d.rows.push_back({c, {}, false});
    return d;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::optional<double> parse_cell(std::string_view cell) {
  const std::string l = lower(cell);
  if (l == "yes" || l == "true") return 1.0;
  if (l == "no" || l == "false") return 0.0;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] inline void cell_error(std::size_t row, const std::string& column, const std::string& what) {
  throw ParseError("row " + std::to_string(row) + ", column '" + column + "': " + what, row);
}

}  // namespace detail

/// Reads count data. Rows are numbered from 1 at the header. Only the count
/// column, `censored`, and the listed covariates are parsed; with no list,
/// every other column is a covariate.
inline CountData read_count_csv(std::istream& in, const std::string& count_column = "count",
                                const std::optional<std::vector<std::string>>& covariates = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input: header row expected", 1);
  const auto header = detail::split_csv_line(line);
  std::optional<std::size_t> count_col, censored_col;
  std::vector<std::size_t> cov_cols;
  CountData data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == count_column) count_col = c;
    else if (header[c] == "censored") censored_col = c;
  }
  if (!count_col) throw ParseError("missing count column '" + count_column + "'", 1);
  if (covariates) {
    for (const auto& name : *covariates) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end() || name == count_column || name == "censored") {
        throw ParseError("missing covariate column '" + name + "'", 1);
      }
      cov_cols.push_back(static_cast<std::size_t>(it - header.begin()));
      data.covariate_names.push_back(name);
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == *count_col || (censored_col && c == *censored_col)) continue;
      cov_cols.push_back(c);
      data.covariate_names.push_back(header[c]);
    }
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    }
    CountRow r;
    const auto count = detail::parse_cell(cells[*count_col]);
    if (!count || *count < 0 || *count != std::floor(*count) || *count > 1e6) {
      detail::cell_error(row, count_column, "expected a non-negative integer, found '" + cells[*count_col] + "'");
    }
    r.count = static_cast<unsigned>(*count);
    if (censored_col) {
      const auto c = detail::parse_cell(cells[*censored_col]);
      if (!c || (*c != 0.0 && *c != 1.0)) detail::cell_error(row, "censored", "expected 0 or 1, found '" + cells[*censored_col] + "'");
      r.censored = *c == 1.0;
    }
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const auto v = detail::parse_cell(cells[cov_cols[k]]);
      if (!v) detail::cell_error(row, data.covariate_names[k], "non-numeric value '" + cells[cov_cols[k]] + "'");
      r.covariates.push_back(*v);
    }
    data.rows.push_back(std::move(r));
  }
  if (data.rows.empty()) throw ParseError("no data rows", row);
  return data;
}

inline CountData read_count_csv_file(const std::string& path, const std::string& count_column = "count",
                                     const std::optional<std::vector<std::string>>& covariates = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open data file '" + path + "'");
  return read_count_csv(in, count_column, covariates);
}

}  // namespace renewal_count
