#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/linalg.hpp"
#include "zipbf/priors.hpp"
#include "zipbf/regression_data.hpp"

namespace zipbf::priors {

/// Deterministic realization of the partial-Jeffreys construction for
/// rank-deficient positive-count designs. Row indices refer to the reordered
/// data (zero counts first) and are 0-based.
struct PartialPriorSpec {
  int t = 0;                        // rank of A_plus
  std::vector<int> j_set;           // t positive-count rows spanning V_plus
  std::vector<int> l_set;           // q - t zero-count rows completing a basis
  std::vector<int> in_span_rows;    // zero-count rows lying in V_plus (r of them)
  int r = 0;
  Eigen::MatrixXd C;                // (n-k) x t: a_m = sum_i C(m,i) a_{j_i}
  Eigen::MatrixXd B;                // q x (q-t), orthonormal basis of span{a_l}
  Eigen::MatrixXd D;                // (q-t) x (q-t), D(w,h) = b_h . a_{l_w}
  double log_abs_det_D = 0.0;
};

namespace detail {

/// Appends v / ||v_perp|| to the orthonormal columns of basis if v sticks out
/// of their span by more than tol relative; returns true when added.
inline bool try_extend_basis(Eigen::MatrixXd& basis, const Eigen::VectorXd& v,
                             double tol) {
  Eigen::VectorXd res = v;
  for (int pass = 0; pass < 2; ++pass) // twice for numerical orthogonality
    if (basis.cols() > 0) res -= basis * (basis.transpose() * res);
  if (res.norm() <= tol * (1.0 + v.norm())) return false;
  basis.conservativeResize(basis.rows(), basis.cols() + 1);
  basis.col(basis.cols() - 1) = res / res.norm();
  return true;
}

} // namespace detail

/// Builds the partial prior scaffolding: lexicographically first spanning
/// j_set among positive rows, in-span detection of zero rows against V_plus,
/// lexicographically first completing l_set, the reconstruction matrix C and
/// the orthonormal basis B of span{a_l}.
inline PartialPriorSpec build_partial_prior(const reg::RegressionData& data) {
  const int q = data.q();
  const int k = data.k;
  const int n = data.n();
  const double tol = num::default_rank_tol;

  if (num::rank_and_basis(data.A).rank < q)
    throw design_rank_error("build_partial_prior: rank(A) < q");
  const int t = num::rank_and_basis(data.positive_rows().transpose()).rank;
  if (t >= q)
    throw domain_error("build_partial_prior: A_plus has full rank; use the standard prior");

  PartialPriorSpec spec;
  spec.t = t;

  Eigen::MatrixXd v_plus(q, 0); // orthonormal, grown row by row
  for (int m = k; m < n && static_cast<int>(spec.j_set.size()) < t; ++m)
    if (detail::try_extend_basis(v_plus, data.A.row(m).transpose(), tol))
      spec.j_set.push_back(m);
  if (static_cast<int>(spec.j_set.size()) != t)
    throw numerical_error("build_partial_prior: could not span V_plus");

  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd a = data.A.row(i).transpose();
    if (num::span_residual(a, v_plus) <= tol * (1.0 + a.norm()))
      spec.in_span_rows.push_back(i);
  }
  spec.r = static_cast<int>(spec.in_span_rows.size());

  Eigen::MatrixXd full = v_plus;
  size_t skip = 0;
  for (int i = 0; i < k && static_cast<int>(spec.l_set.size()) < q - t; ++i) {
    if (skip < spec.in_span_rows.size() && spec.in_span_rows[skip] == i) {
      ++skip;
      continue;
    }
    if (detail::try_extend_basis(full, data.A.row(i).transpose(), tol))
      spec.l_set.push_back(i);
  }
  if (static_cast<int>(spec.l_set.size()) != q - t)
    throw numerical_error("build_partial_prior: zero-count rows cannot complete a basis "
                          "(numerical rank trouble)");

  Eigen::MatrixXd a_j(q, t);
  for (int i = 0; i < t; ++i) a_j.col(i) = data.A.row(spec.j_set[i]).transpose();
  const auto a_j_qr = a_j.colPivHouseholderQr();

  spec.C.resize(n - k, t);
  for (int m = k; m < n; ++m) {
    const Eigen::VectorXd a = data.A.row(m).transpose();
    const Eigen::VectorXd c = a_j_qr.solve(a);
    if ((a_j * c - a).norm() > tol * (1.0 + a.norm()))
      throw numerical_error("build_partial_prior: positive-count row " +
                            std::to_string(m + 1) + " not reconstructible from j_set");
    spec.C.row(m - k) = c.transpose();
  }

  // Canonical orthonormal basis: modified Gram-Schmidt in l_set order.
  spec.B.resize(q, 0);
  for (int w = 0; w < q - t; ++w)
    if (!detail::try_extend_basis(spec.B, data.A.row(spec.l_set[w]).transpose(), tol))
      throw numerical_error("build_partial_prior: degenerate l_set basis");

  spec.D.resize(q - t, q - t);
  for (int w = 0; w < q - t; ++w)
    spec.D.row(w) = (spec.B.transpose() * data.A.row(spec.l_set[w]).transpose()).transpose();
  const double det = spec.D.determinant();
  if (det == 0.0 || !std::isfinite(det))
    throw numerical_error("build_partial_prior: singular D matrix");
  spec.log_abs_det_D = std::log(std::abs(det));
  return spec;
}

/// Reconstructs log lambda_m for every positive-count row from the t chosen
/// log lambda_j values via C and the offsets.
inline Eigen::VectorXd positive_log_lambdas(const Eigen::VectorXd& log_lambda_j,
                                            const PartialPriorSpec& spec,
                                            const reg::RegressionData& data) {
  const int t = spec.t;
  Eigen::VectorXd centered(t);
  for (int i = 0; i < t; ++i)
    centered(i) = log_lambda_j(i) - data.offsets(spec.j_set[i]);
  Eigen::VectorXd out = spec.C * centered;
  for (int m = 0; m < out.size(); ++m) out(m) += data.offsets(data.k + m);
  return out;
}

/// log of the partial-Jeffreys density (on lambda_j) times the proper density
/// (on lambda_l) induced from independent Exp(1) priors on xi through
/// log lambda_{l_w} = offset_{l_w} + sum_h D(w,h) log xi_h.
inline double log_partial_prior(const Eigen::VectorXd& lambda_j,
                                const Eigen::VectorXd& lambda_l,
                                const PartialPriorSpec& spec,
                                const reg::RegressionData& data) {
  const int t = spec.t;
  const int qt = static_cast<int>(spec.l_set.size());
  if (lambda_j.size() != t || lambda_l.size() != qt)
    throw domain_error("log_partial_prior: dimension mismatch");
  for (int i = 0; i < t; ++i)
    if (!(lambda_j(i) > 0.0))
      throw domain_error("log_partial_prior: lambda_j must be positive");
  for (int w = 0; w < qt; ++w)
    if (!(lambda_l(w) > 0.0))
      throw domain_error("log_partial_prior: lambda_l must be positive");

  const Eigen::VectorXd log_lj = lambda_j.array().log();
  const Eigen::VectorXd log_pos = positive_log_lambdas(log_lj, spec, data);
  double v = -log_lj.sum() + 0.5 * num::weighted_gram_log_det(spec.C, log_pos);

  // Proper part: change of variables from xi to lambda_l.
  Eigen::VectorXd rhs(qt);
  for (int w = 0; w < qt; ++w)
    rhs(w) = std::log(lambda_l(w)) - data.offsets(spec.l_set[w]);
  const Eigen::VectorXd log_xi = spec.D.fullPivLu().solve(rhs);
  for (int h = 0; h < qt; ++h)
    v += -std::exp(log_xi(h)) + log_xi(h) - std::log(lambda_l(h));
  v -= spec.log_abs_det_D;
  return v;
}

} // namespace zipbf::priors
