#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/special.hpp"

namespace zipbf::num {

/// Relative singular-value cutoff used throughout for numerical rank and
/// span-membership decisions.
inline constexpr double default_rank_tol = 1e-10;

struct RankBasis {
  int rank = 0;
  Eigen::MatrixXd basis; // orthonormal columns spanning the column space
};

/// Numerical rank and an orthonormal basis of the column space, decided by
/// singular values above tol * sigma_max.
inline RankBasis rank_and_basis(const Eigen::MatrixXd& m,
                                double tol = default_rank_tol) {
  if (m.size() == 0) return {0, Eigen::MatrixXd(m.rows(), 0)};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return {rank, svd.matrixU().leftCols(rank)};
}

/// Squared-residual of projecting v onto the column space spanned by an
/// orthonormal basis.
inline double span_residual(const Eigen::VectorXd& v,
                            const Eigen::MatrixXd& orthonormal_basis) {
  if (orthonormal_basis.cols() == 0) return v.norm();
  return (v - orthonormal_basis * (orthonormal_basis.transpose() * v)).norm();
}

struct NnlsResult {
  bool feasible = false;
  Eigen::VectorXd coefficients;
  double residual_norm = 0.0;
};

/// Nonnegative least squares min_{c >= 0} ||target - B c|| via the
/// Lawson-Hanson active-set method. `feasible` reports whether the optimum
/// reaches the target within tol * (1 + ||target||).
inline NnlsResult nnls_feasible(const Eigen::VectorXd& target,
                                const Eigen::MatrixXd& basis,
                                double tol = default_rank_tol) {
  const int m = static_cast<int>(basis.cols());
  if (m == 0 || basis.rows() != target.size())
    throw domain_error("nnls_feasible: basis empty or dimension mismatch");

  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(m, false);
  Eigen::VectorXd resid = target;

  const double grad_eps =
      1e-12 * std::max(1.0, target.norm()) * std::max(1.0, basis.norm());
  const int max_outer = 6 * m + 30;

  auto solve_passive = [&](Eigen::VectorXd& out) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (passive[i]) idx.push_back(i);
    Eigen::MatrixXd bp(basis.rows(), static_cast<int>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) bp.col(j) = basis.col(idx[j]);
    Eigen::VectorXd sol = bp.colPivHouseholderQr().solve(target);
    out = Eigen::VectorXd::Zero(m);
    for (size_t j = 0; j < idx.size(); ++j) out(idx[j]) = sol(j);
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd w = basis.transpose() * resid;
    int best = -1;
    double best_w = grad_eps;
    for (int i = 0; i < m; ++i)
      if (!passive[i] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    if (best < 0) break;
    passive[best] = true;

    Eigen::VectorXd z;
    solve_passive(z);
    int inner = 0;
    while (true) {
      double alpha = 1.0;
      bool clipped = false;
      for (int i = 0; i < m; ++i) {
        if (passive[i] && z(i) <= 0.0) {
          const double a = c(i) / (c(i) - z(i));
          if (a < alpha) alpha = a;
          clipped = true;
        }
      }
      if (!clipped) break;
      c += alpha * (z - c);
      for (int i = 0; i < m; ++i)
        if (passive[i] && c(i) <= 1e-14) {
          c(i) = 0.0;
          passive[i] = false;
        }
      solve_passive(z);
      if (++inner > 3 * m + 10) break;
    }
    c = z;
    resid = target - basis * c;
  }

  for (int i = 0; i < m; ++i)
    if (c(i) < 0.0) c(i) = 0.0;
  resid = target - basis * c;

  NnlsResult r;
  r.coefficients = c;
  r.residual_norm = resid.norm();
  r.feasible = r.residual_norm <= tol * (1.0 + target.norm());
  return r;
}

/// ln det( sum_i exp(log_w_i) a_i a_i^T ) for rows a_i^T of A.
///
/// Small problems go through the exact Binet-Cauchy expansion
///   det = sum over q-subsets of (w_{i1}...w_{iq}) det(A(i))^2,
/// a log-sum-exp that stays correct for arbitrarily spread log-weights (a
/// Cholesky of the assembled Gram matrix loses the determinant entirely once
/// the weights span more than ~16 orders of magnitude, which the divergence
/// diagnostics rely on). Larger problems fall back to a Cholesky of the
/// max-normalized Gram matrix. Returns -inf for a numerically singular Gram.
inline double weighted_gram_log_det(const Eigen::MatrixXd& rows,
                                    const Eigen::VectorXd& log_weights) {
  const int q = static_cast<int>(rows.cols());
  const int n = static_cast<int>(rows.rows());
  if (log_weights.size() != n)
    throw domain_error("weighted_gram_log_det: weight/row count mismatch");
  if (n == 0 || q == 0 || n < q) return neg_inf;

  const double m = log_weights.maxCoeff();
  if (m == neg_inf) return neg_inf;

  if (q == 1) {
    LogSumAccumulator acc;
    for (int i = 0; i < n; ++i) {
      const double a = rows(i, 0);
      if (a != 0.0)
        acc.add(log_weights(i) + 2.0 * std::log(std::abs(a)));
    }
    return acc.log_sum();
  }

  // subset count C(n, q), capped
  long subsets = 1;
  for (int i = 0; i < q; ++i) subsets = subsets * (n - i) / (i + 1);
  if (subsets <= 2048) {
    LogSumAccumulator acc;
    Eigen::MatrixXd sub(q, q);
    std::vector<int> idx(q);
    const std::function<void(int, int, double)> rec = [&](int start, int depth,
                                                          double logw) {
      if (depth == q) {
        for (int d = 0; d < q; ++d) sub.row(d) = rows.row(idx[d]);
        const double det = sub.determinant();
        if (det != 0.0) acc.add(logw + 2.0 * std::log(std::abs(det)));
        return;
      }
      for (int i = start; i <= n - (q - depth); ++i) {
        idx[depth] = i;
        rec(i + 1, depth + 1, logw + log_weights(i));
      }
    };
    rec(0, 0, 0.0);
    return acc.log_sum();
  }

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(log_weights(i) - m);
    if (w > 0.0) g.noalias() += w * rows.row(i).transpose() * rows.row(i);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) return neg_inf;
  const double pivot_floor =
      q * std::numeric_limits<double>::epsilon() * g.diagonal().maxCoeff();
  double log_det = 0.0;
  for (int i = 0; i < q; ++i) {
    const double d = llt.matrixL()(i, i);
    if (!(d * d > pivot_floor)) return neg_inf;
    log_det += 2.0 * std::log(d);
  }
  return q * m + log_det;
}

} // namespace zipbf::num
