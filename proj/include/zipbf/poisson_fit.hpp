#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/special.hpp"

namespace zipbf::num {

struct PoissonMode {
  Eigen::VectorXd mode;
  Eigen::MatrixXd curvature; // sum_i lambda_i a_i a_i^T at the mode
  int iterations = 0;
};

/// Poisson log-likelihood sum_i (x_i log lambda_i - lambda_i) with
/// log lambda_i = offset_i + a_i . beta; factorial terms omitted.
inline double poisson_log_lik(const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& counts,
                              const Eigen::VectorXd& offsets,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = offsets + rows * beta;
  double ll = 0.0;
  for (int i = 0; i < eta.size(); ++i)
    ll += counts(i) * eta(i) - std::exp(eta(i));
  return ll;
}

/// Newton maximization of the Poisson log-likelihood in beta. The design must
/// have full column rank over the supplied rows.
inline PoissonMode poisson_mode(const Eigen::MatrixXd& rows,
                                const Eigen::VectorXd& counts,
                                const Eigen::VectorXd& offsets,
                                int max_iter = 100) {
  const int n = static_cast<int>(rows.rows());
  const int q = static_cast<int>(rows.cols());
  if (counts.size() != n || offsets.size() != n)
    throw domain_error("poisson_mode: shape mismatch");
  if (n < 1 || q < 1) throw domain_error("poisson_mode: empty problem");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  double ll = poisson_log_lik(rows, counts, offsets, beta);
  Eigen::MatrixXd h(q, q);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd eta = offsets + rows * beta;
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = std::exp(std::min(eta(i), 700.0));
    const Eigen::VectorXd grad = rows.transpose() * (counts - lam);
    h.setZero();
    for (int i = 0; i < n; ++i)
      h.noalias() += lam(i) * rows.row(i).transpose() * rows.row(i);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success)
      throw numerical_error("poisson_mode: singular curvature");
    Eigen::VectorXd step = ldlt.solve(grad);

    double scale = 1.0;
    Eigen::VectorXd cand;
    double ll_new;
    for (int half = 0; half < 60; ++half) {
      cand = beta + scale * step;
      ll_new = poisson_log_lik(rows, counts, offsets, cand);
      if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) break;
      scale *= 0.5;
    }
    beta = cand;
    ll = ll_new;
    if ((scale * step).cwiseAbs().maxCoeff() <=
        1e-12 * (1.0 + beta.cwiseAbs().maxCoeff())) {
      const Eigen::VectorXd eta_m = offsets + rows * beta;
      Eigen::MatrixXd curv = Eigen::MatrixXd::Zero(q, q);
      for (int i = 0; i < n; ++i)
        curv.noalias() +=
            std::exp(eta_m(i)) * rows.row(i).transpose() * rows.row(i);
      return {beta, curv, it};
    }
  }
  throw numerical_error("poisson_mode: no convergence in " +
                        std::to_string(max_iter) + " iterations");
}

} // namespace zipbf::num
