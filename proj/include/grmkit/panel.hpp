#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grmkit/errors.hpp"

namespace grmkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// p assets by n observations of simple returns. Rows follow asset_ids,
// columns follow timestamps (ISO-8601, strictly increasing).
struct ReturnsPanel {
  std::vector<std::string> asset_ids;
  std::vector<std::string> timestamps;
  Matrix values;  // p x n
  bool centered = false;

  Index p() const { return values.rows(); }
  Index n() const { return values.cols(); }
};

struct SectorMap {
  std::map<std::string, std::string> entries;  // symbol -> sector label
};

struct DistanceMatrix {
  std::vector<std::string> asset_ids;
  Matrix d;  // p x p, symmetric, zero diagonal, miles
};

struct FactorPanel {
  std::vector<std::string> factor_names;
  std::vector<std::string> timestamps;
  Matrix values;  // k x n
  bool centered = false;

  Index k() const { return values.rows(); }
  Index n() const { return values.cols(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  require(!t.empty(), errc::missing_value, "empty cell at " + where);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && ptr == last, errc::missing_value,
          "non-numeric cell '" + t + "' at " + where);
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_failure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

inline void check_unique_symbols(const std::vector<std::string>& ids,
                                 const std::string& path) {
  std::set<std::string> seen;
  for (const auto& id : ids)
    require(seen.insert(id).second, errc::duplicate_symbol,
            "symbol '" + id + "' repeated in " + path);
}

inline void check_increasing_dates(const std::vector<std::string>& ts,
                                   const std::string& path) {
  // ISO-8601 dates order lexicographically.
  for (std::size_t i = 1; i < ts.size(); ++i)
    require(ts[i - 1] < ts[i], errc::non_monotone_dates,
            "dates not strictly increasing at row " + std::to_string(i + 1) +
                " of " + path);
}

}  // namespace detail

enum class ReturnsFormat { wide_csv };

// Wide CSV: header `date,SYM1,SYM2,...`, one row per observation date.
inline ReturnsPanel load_returns(const std::string& path,
                                 ReturnsFormat format = ReturnsFormat::wide_csv) {
  require(format == ReturnsFormat::wide_csv, errc::invalid_argument,
          "unsupported returns format");
  const auto lines = detail::read_lines(path);
  require(lines.size() >= 2, errc::io_failure, "no data rows in " + path);

  const auto header = detail::split_csv_line(lines[0]);
  require(header.size() >= 2, errc::io_failure, "header too short in " + path);
  std::vector<std::string> ids(header.begin() + 1, header.end());
  detail::check_unique_symbols(ids, path);

  const Index p = static_cast<Index>(ids.size());
  const Index n = static_cast<Index>(lines.size() - 1);
  ReturnsPanel panel;
  panel.asset_ids = std::move(ids);
  panel.values.resize(p, n);
  panel.timestamps.reserve(n);
  for (Index j = 0; j < n; ++j) {
    const auto cells = detail::split_csv_line(lines[j + 1]);
    require(cells.size() == static_cast<std::size_t>(p) + 1, errc::missing_value,
            "row " + std::to_string(j + 2) + " of " + path + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(p + 1));
    panel.timestamps.push_back(cells[0]);
    for (Index i = 0; i < p; ++i)
      panel.values(i, j) = detail::parse_number(
          cells[i + 1], "row " + std::to_string(j + 2) + ", column '" +
                            panel.asset_ids[i] + "' of " + path);
  }
  detail::check_increasing_dates(panel.timestamps, path);
  require(p >= 2 && n >= 2, errc::insufficient_data,
          "panel needs p >= 2 and n >= 2, got p=" + std::to_string(p) +
              " n=" + std::to_string(n));
  panel.centered = false;
  return panel;
}

inline SectorMap load_sectors(const std::string& path) {
  const auto lines = detail::read_lines(path);
  require(lines.size() >= 2, errc::io_failure, "no data rows in " + path);
  SectorMap sectors;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split_csv_line(lines[r]);
    require(cells.size() == 2 && !cells[0].empty() && !cells[1].empty(),
            errc::missing_value,
            "row " + std::to_string(r + 1) + " of " + path +
                " must be symbol,sector");
    require(sectors.entries.emplace(cells[0], cells[1]).second,
            errc::duplicate_symbol, "symbol '" + cells[0] + "' repeated in " + path);
  }
  return sectors;
}

inline DistanceMatrix load_distances(const std::string& path) {
  const auto lines = detail::read_lines(path);
  require(lines.size() >= 2, errc::io_failure, "no data rows in " + path);
  const auto header = detail::split_csv_line(lines[0]);
  require(header.size() >= 3, errc::io_failure, "header too short in " + path);
  std::vector<std::string> ids(header.begin() + 1, header.end());
  detail::check_unique_symbols(ids, path);
  const Index p = static_cast<Index>(ids.size());
  require(static_cast<Index>(lines.size() - 1) == p, errc::dimension_mismatch,
          "distance matrix in " + path + " is not square");

  DistanceMatrix dist;
  dist.asset_ids = std::move(ids);
  dist.d.resize(p, p);
  for (Index i = 0; i < p; ++i) {
    const auto cells = detail::split_csv_line(lines[i + 1]);
    require(cells.size() == static_cast<std::size_t>(p) + 1, errc::missing_value,
            "row " + std::to_string(i + 2) + " of " + path + " malformed");
    require(cells[0] == dist.asset_ids[i], errc::dimension_mismatch,
            "row symbol '" + cells[0] + "' does not match header order in " + path);
    for (Index j = 0; j < p; ++j)
      dist.d(i, j) = detail::parse_number(
          cells[j + 1], "row " + std::to_string(i + 2) + " of " + path);
  }
  for (Index i = 0; i < p; ++i) {
    require(dist.d(i, i) == 0.0, errc::invalid_argument,
            "nonzero diagonal in distance matrix " + path);
    for (Index j = 0; j < i; ++j) {
      require(dist.d(i, j) == dist.d(j, i), errc::invalid_argument,
              "asymmetric distance matrix in " + path);
      require(dist.d(i, j) > 0.0, errc::zero_distance,
              "non-positive off-diagonal distance in " + path);
    }
  }
  return dist;
}

inline FactorPanel load_factors(const std::string& path) {
  const auto lines = detail::read_lines(path);
  require(lines.size() >= 2, errc::io_failure, "no data rows in " + path);
  const auto header = detail::split_csv_line(lines[0]);
  require(header.size() >= 2, errc::io_failure, "header too short in " + path);
  std::vector<std::string> names(header.begin() + 1, header.end());
  detail::check_unique_symbols(names, path);

  const Index k = static_cast<Index>(names.size());
  const Index n = static_cast<Index>(lines.size() - 1);
  FactorPanel factors;
  factors.factor_names = std::move(names);
  factors.values.resize(k, n);
  factors.timestamps.reserve(n);
  for (Index j = 0; j < n; ++j) {
    const auto cells = detail::split_csv_line(lines[j + 1]);
    require(cells.size() == static_cast<std::size_t>(k) + 1, errc::missing_value,
            "row " + std::to_string(j + 2) + " of " + path + " malformed");
    factors.timestamps.push_back(cells[0]);
    for (Index i = 0; i < k; ++i)
      factors.values(i, j) = detail::parse_number(
          cells[i + 1], "row " + std::to_string(j + 2) + " of " + path);
  }
  detail::check_increasing_dates(factors.timestamps, path);
  factors.centered = false;
  return factors;
}

// Subtract each asset's sample mean. Idempotent.
inline ReturnsPanel center(const ReturnsPanel& panel) {
  ReturnsPanel out = panel;
  out.values.colwise() -= panel.values.rowwise().mean();
  out.centered = true;
  return out;
}

inline FactorPanel center(const FactorPanel& factors) {
  FactorPanel out = factors;
  out.values.colwise() -= factors.values.rowwise().mean();
  out.centered = true;
  return out;
}

// Observations with timestamp <= boundary go in-sample, the rest out-of-sample.
inline std::pair<ReturnsPanel, ReturnsPanel> split(const ReturnsPanel& panel,
                                                   const std::string& boundary) {
  Index n_in = 0;
  while (n_in < panel.n() && panel.timestamps[n_in] <= boundary) ++n_in;
  const Index n_out = panel.n() - n_in;
  require(n_in >= 2 && n_out >= 2, errc::empty_split,
          "split at " + boundary + " leaves n_I=" + std::to_string(n_in) +
              ", n_O=" + std::to_string(n_out) + "; both sides need >= 2");

  ReturnsPanel in, out;
  in.asset_ids = out.asset_ids = panel.asset_ids;
  in.centered = out.centered = panel.centered;
  in.timestamps.assign(panel.timestamps.begin(), panel.timestamps.begin() + n_in);
  out.timestamps.assign(panel.timestamps.begin() + n_in, panel.timestamps.end());
  in.values = panel.values.leftCols(n_in);
  out.values = panel.values.rightCols(n_out);
  return {std::move(in), std::move(out)};
}

// Column range [first, first+count); keeps asset ids and centered flag.
inline ReturnsPanel slice_columns(const ReturnsPanel& panel, Index first,
                                  Index count) {
  require(first >= 0 && count >= 0 && first + count <= panel.n(),
          errc::invalid_argument, "column slice out of range");
  ReturnsPanel out;
  out.asset_ids = panel.asset_ids;
  out.centered = panel.centered;
  out.timestamps.assign(panel.timestamps.begin() + first,
                        panel.timestamps.begin() + first + count);
  out.values = panel.values.middleCols(first, count);
  return out;
}

inline void save_returns(const ReturnsPanel& panel, const std::string& path) {
  std::ofstream outf(path);
  require(outf.good(), errc::io_failure, "cannot write " + path);
  outf << "date";
  for (const auto& id : panel.asset_ids) outf << "," << id;
  outf << "\n";
  outf.precision(17);
  for (Index j = 0; j < panel.n(); ++j) {
    outf << panel.timestamps[j];
    for (Index i = 0; i < panel.p(); ++i) outf << "," << panel.values(i, j);
    outf << "\n";
  }
  require(outf.good(), errc::io_failure, "write failed for " + path);
}

}  // namespace grmkit
