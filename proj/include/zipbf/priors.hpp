#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/linalg.hpp"
#include "zipbf/regression_data.hpp"
#include "zipbf/special.hpp"

namespace zipbf::priors {

/// Which prior family governs the rate parameters. The zero-inflation
/// probability p always carries the uniform prior on (0,1].
struct PriorSpec {
  enum class Family { jeffreys, gamma, reg_jeffreys, partial_jeffreys };
  Family family = Family::jeffreys;
  int l = 0;              // Jeffreys variant for the non-regression test
  int j = 1;              // regression Jeffreys variant
  double a = 1.0;         // gamma shape
  double b = 1.0;         // gamma rate (0 = improper limit, needs s > 0)
};

/// Ratio of the truncated-Poisson to Poisson Jeffreys priors,
/// k(lambda) = sqrt(1 - (lambda+1) e^-lambda) / (1 - e^-lambda).
/// Strictly increasing from 1/sqrt(2) at 0+ to 1 at infinity. Below 1e-4 the
/// direct formula loses all significance to cancellation, so the series
/// k^2 = 1/2 + lambda/6 + O(lambda^3) is used there.
inline double k_lambda(double lambda) {
  if (!(lambda > 0.0))
    throw domain_error("k_lambda: lambda must be positive");
  if (lambda < 1e-4) return std::sqrt(0.5 + lambda / 6.0);
  const double e = std::exp(-lambda);
  return std::sqrt(1.0 - (lambda + 1.0) * e) / (1.0 - e);
}

/// log of the unnormalized prior k(lambda)^l / sqrt(lambda), l in {0,1}.
inline double log_prior_lambda(double lambda, int l) {
  if (!(lambda > 0.0))
    throw domain_error("log_prior_lambda: lambda must be positive");
  if (l != 0 && l != 1)
    throw domain_error("log_prior_lambda: l must be 0 or 1");
  double v = -0.5 * std::log(lambda);
  if (l == 1) v += std::log(k_lambda(lambda));
  return v;
}

/// log Gamma(a, b) density (shape a, rate b).
inline double log_gamma_prior(double lambda, double a, double b) {
  if (!(lambda > 0.0))
    throw domain_error("log_gamma_prior: lambda must be positive");
  if (!(a > 0.0) || !(b > 0.0))
    throw domain_error("log_gamma_prior: a and b must be positive");
  return a * std::log(b) - num::log_gamma(a) + (a - 1.0) * std::log(lambda) -
         b * lambda;
}

/// log of the regression Jeffreys prior |sum_i lambda_i a_i a_i^T|^{1/2},
/// over all rows (j = 0) or positive-count rows only (j = 1). Returns -inf
/// where the weighted Gram matrix is numerically singular (a valid
/// zero-density point, e.g. j = 1 with rank-deficient positive rows).
inline double log_reg_jeffreys(const Eigen::VectorXd& beta,
                               const reg::RegressionData& data, int j) {
  if (j != 0 && j != 1)
    throw domain_error("log_reg_jeffreys: j must be 0 or 1");
  if (beta.size() != data.q())
    throw domain_error("log_reg_jeffreys: beta has wrong dimension");
  const int lo = (j == 1) ? data.k : 0;
  const int rows = data.n() - lo;
  if (rows <= 0) return num::neg_inf;
  const Eigen::VectorXd log_w =
      data.offsets.tail(rows) + data.A.bottomRows(rows) * beta;
  const double log_det =
      num::weighted_gram_log_det(data.A.bottomRows(rows), log_w);
  return log_det == num::neg_inf ? num::neg_inf : 0.5 * log_det;
}

} // namespace zipbf::priors
