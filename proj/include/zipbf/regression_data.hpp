#pragma once

#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/linalg.hpp"

namespace zipbf::reg {

/// Count-regression data with rows reordered so all zero counts come first.
/// `permutation[i]` is the original index of reordered row i.
struct RegressionData {
  Eigen::VectorXd counts;
  Eigen::MatrixXd A;
  Eigen::VectorXd offsets;
  std::vector<int> permutation;
  int k = 0; // number of zero counts

  int n() const { return static_cast<int>(counts.size()); }
  int q() const { return static_cast<int>(A.cols()); }
  int n_positive() const { return n() - k; }

  Eigen::Block<const Eigen::MatrixXd> positive_rows() const {
    return A.bottomRows(n() - k);
  }
  Eigen::VectorXd positive_counts() const { return counts.tail(n() - k); }
  Eigen::VectorXd positive_offsets() const { return offsets.tail(n() - k); }
};

/// Validates and reorders raw inputs into RegressionData. Counts must be
/// nonnegative integers; the design must have full column rank unless
/// `require_full_rank` is lowered (used by the diagnostics path).
inline RegressionData load_regression(const Eigen::VectorXd& counts,
                                      const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& offsets,
                                      bool require_full_rank = true) {
  const int n = static_cast<int>(counts.size());
  if (n == 0) throw input_error("load_regression: no observations");
  if (A.rows() != n || offsets.size() != n)
    throw input_error("load_regression: row count mismatch between counts, design and offsets");
  if (A.cols() < 1) throw input_error("load_regression: design has no columns");
  for (int i = 0; i < n; ++i) {
    if (!(counts(i) >= 0.0) || counts(i) != std::floor(counts(i)))
      throw input_error("load_regression: counts must be nonnegative integers (row " +
                        std::to_string(i + 1) + ")");
    if (!std::isfinite(offsets(i)) || !A.row(i).allFinite())
      throw input_error("load_regression: non-finite entry in row " +
                        std::to_string(i + 1));
  }

  RegressionData d;
  d.permutation.reserve(n);
  for (int i = 0; i < n; ++i)
    if (counts(i) == 0.0) d.permutation.push_back(i);
  d.k = static_cast<int>(d.permutation.size());
  for (int i = 0; i < n; ++i)
    if (counts(i) != 0.0) d.permutation.push_back(i);

  d.counts.resize(n);
  d.offsets.resize(n);
  d.A.resize(n, A.cols());
  for (int i = 0; i < n; ++i) {
    d.counts(i) = counts(d.permutation[i]);
    d.offsets(i) = offsets(d.permutation[i]);
    d.A.row(i) = A.row(d.permutation[i]);
  }

  if (require_full_rank) {
    const int rank = num::rank_and_basis(d.A).rank;
    if (rank < d.q())
      throw design_rank_error("design matrix rank " + std::to_string(rank) +
                              " < q = " + std::to_string(d.q()));
  }
  return d;
}

} // namespace zipbf::reg
