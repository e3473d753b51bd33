#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"

namespace zipbf::cli {

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline long parse_count(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw input_error("line " + std::to_string(line_no) +
                      ": expected a nonnegative integer count, got '" + s + "'");
  }
}

inline double parse_real(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw input_error("line " + std::to_string(line_no) +
                      ": expected a number, got '" + s + "'");
  }
}

} // namespace detail

/// Counts file: one nonnegative integer per line, optional `count` header,
/// `#` starts a comment line.
inline std::vector<long> read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open counts file: " + path);
  std::vector<long> counts;
  std::string line;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (first_content && detail::lower(s) == "count") {
      first_content = false;
      continue;
    }
    first_content = false;
    counts.push_back(detail::parse_count(s, line_no));
  }
  if (counts.empty()) throw input_error("counts file has no data: " + path);
  return counts;
}

struct RegressionInput {
  Eigen::VectorXd counts;
  Eigen::MatrixXd design;
  Eigen::VectorXd offsets;
  std::vector<std::string> covariate_names;
};

/// Regression CSV with header `count[,offset][,x1,...,xq]`. A missing offset
/// column means zero offsets; `add_intercept` prepends a column of ones
/// (never implicit).
inline RegressionInput read_regression_csv(const std::string& path,
                                           bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open regression file: " + path);

  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    header = detail::split_csv(s);
    break;
  }
  if (header.empty()) throw input_error("regression file has no header: " + path);
  if (detail::lower(header[0]) != "count")
    throw input_error("line " + std::to_string(line_no) +
                      ": header must start with 'count'");
  const bool has_offset = header.size() > 1 && detail::lower(header[1]) == "offset";
  const size_t first_cov = has_offset ? 2 : 1;

  RegressionInput ri;
  for (size_t c = first_cov; c < header.size(); ++c)
    ri.covariate_names.push_back(header[c]);

  std::vector<long> counts;
  std::vector<double> offsets;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto fields = detail::split_csv(s);
    if (fields.size() != header.size())
      throw input_error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    counts.push_back(detail::parse_count(fields[0], line_no));
    offsets.push_back(has_offset ? detail::parse_real(fields[1], line_no) : 0.0);
    std::vector<double> row;
    for (size_t c = first_cov; c < fields.size(); ++c)
      row.push_back(detail::parse_real(fields[c], line_no));
    rows.push_back(std::move(row));
  }
  if (counts.empty()) throw input_error("regression file has no data rows: " + path);

  const int n = static_cast<int>(counts.size());
  const int q_file = static_cast<int>(ri.covariate_names.size());
  const int q = q_file + (add_intercept ? 1 : 0);
  if (q == 0)
    throw input_error("no covariate columns in " + path +
                      "; pass --intercept for an intercept-only model");

  ri.counts.resize(n);
  ri.offsets.resize(n);
  ri.design.resize(n, q);
  for (int i = 0; i < n; ++i) {
    ri.counts(i) = static_cast<double>(counts[i]);
    ri.offsets(i) = offsets[i];
    int c0 = 0;
    if (add_intercept) {
      ri.design(i, 0) = 1.0;
      c0 = 1;
    }
    for (int c = 0; c < q_file; ++c) ri.design(i, c0 + c) = rows[i][c];
  }
  if (add_intercept)
    ri.covariate_names.insert(ri.covariate_names.begin(), "intercept");
  return ri;
}

} // namespace zipbf::cli
