#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stablesums/error.hpp"
#include "stablesums/multi_series.hpp"

namespace stablesums::io {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  std::chrono::year_month_day ymd() const {
    return {std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
            std::chrono::day{static_cast<unsigned>(day)}};
  }

  /// Strict YYYY-MM-DD.
  static Date parse(const std::string& s) {
    Date d;
    const bool shape = s.size() == 10 && s[4] == '-' && s[7] == '-';
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
      const char* b = s.data() + pos;
      auto [p, ec] = std::from_chars(b, b + len, out);
      return ec == std::errc() && p == b + len;
    };
    if (!shape || !num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day) || !d.ymd().ok()) {
      throw precondition_error("malformed ISO date '" + s + "'");
    }
    return d;
  }

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }

  Date plus_days(long n) const {
    const std::chrono::year_month_day r{std::chrono::sys_days{ymd()} + std::chrono::days{n}};
    return {static_cast<int>(r.year()), static_cast<int>(static_cast<unsigned>(r.month())),
            static_cast<int>(static_cast<unsigned>(r.day()))};
  }
};

/// Daily multi-station observations. values[t][j] is empty when missing.
struct StationTable {
  std::vector<Date> dates;
  std::vector<std::string> station_names;
  std::vector<std::vector<std::optional<double>>> values;
  std::optional<std::set<int>> season_filter;
  std::string date_column = "date";

  std::size_t rows() const { return dates.size(); }
  std::size_t dim() const { return station_names.size(); }

  std::size_t incomplete_rows() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto& row) {
      return std::any_of(row.begin(), row.end(), [](const auto& v) { return !v.has_value(); });
    }));
  }

  /// Rows with every station observed, in date order.
  MultiSeries complete() const {
    std::vector<double> v;
    std::size_t n = 0;
    for (const auto& row : values) {
      if (std::any_of(row.begin(), row.end(), [](const auto& x) { return !x.has_value(); })) continue;
      for (const auto& x : row) v.push_back(*x);
      ++n;
    }
    return MultiSeries(n, dim(), std::move(v), station_names);
  }

  bool operator==(const StationTable&) const = default;
};

struct CsvSchema {
  std::string date_column = "date";
  /// Keep only rows in these months (1-12).
  std::optional<std::set<int>> months;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

}  // namespace detail

/// Header: a date column plus one column per station. Blank, NA or NaN
/// cells are missing. Rows are returned in date order.
inline StationTable parse_csv(std::istream& in, const CsvSchema& schema = {}) {
  std::string line;
  if (!std::getline(in, line)) throw precondition_error("csv: empty input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);
  const auto date_it = std::find(header.begin(), header.end(), schema.date_column);
  if (date_it == header.end()) throw precondition_error("csv: no '" + schema.date_column + "' column in header");
  const auto date_col = static_cast<std::size_t>(date_it - header.begin());
  require(header.size() >= 2, "csv: at least one station column is required");

  StationTable t;
  t.date_column = schema.date_column;
  t.season_filter = schema.months;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != date_col) t.station_names.push_back(header[i]);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw precondition_error("csv line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                               " cells, found " + std::to_string(cells.size()));
    }
    const Date d = Date::parse(detail::trim(cells[date_col]));
    if (schema.months && !schema.months->contains(d.month)) continue;
    std::vector<std::optional<double>> row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == date_col) continue;
      const auto c = detail::trim(cells[i]);
      if (detail::is_missing(c)) {
        row.emplace_back();
        continue;
      }
      double v = 0.0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || p != c.data() + c.size() || !std::isfinite(v)) {
        throw precondition_error("csv line " + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
      }
      if (v < 0.0) throw precondition_error("csv line " + std::to_string(line_no) + ": negative value");
      row.push_back(v);
    }
    t.dates.push_back(d);
    t.values.push_back(std::move(row));
  }
  std::vector<std::size_t> order(t.dates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return t.dates[a] < t.dates[b]; });
  StationTable sorted = t;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.dates[i] = t.dates[order[i]];
    sorted.values[i] = t.values[order[i]];
    if (i > 0 && sorted.dates[i] == sorted.dates[i - 1]) {
      throw precondition_error("csv: duplicate date " + sorted.dates[i].iso());
    }
  }
  return sorted;
}

inline StationTable load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw precondition_error("cannot open '" + path + "'");
  return parse_csv(in, schema);
}

/// Writes values with round-trip precision; missing cells are blank.
inline void write_csv(const StationTable& t, std::ostream& out) {
  out << t.date_column;
  for (const auto& s : t.station_names) out << ',' << s;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < t.rows(); ++i) {
    out << t.dates[i].iso();
    for (const auto& v : t.values[i]) {
      out << ',';
      if (v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *v);
        out.write(buf, p - buf);
      }
    }
    out << '\n';
  }
}

inline void write_csv(const StationTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw precondition_error("cannot write '" + path + "'");
  write_csv(t, out);
}

/// Daily table from a simulated series, starting at `start`.
inline StationTable from_series(const MultiSeries& s, Date start = {2000, 1, 1}) {
  StationTable t;
  t.station_names = s.labels();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    t.dates.push_back(start.plus_days(static_cast<long>(i)));
    std::vector<std::optional<double>> row;
    for (std::size_t j = 0; j < s.dim(); ++j) row.emplace_back(s(i, j));
    t.values.push_back(std::move(row));
  }
  return t;
}

}  // namespace stablesums::io
