#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/errors.hpp"
#include "zipbf/exact_bf.hpp"
#include "zipbf/integrate.hpp"
#include "zipbf/linalg.hpp"
#include "zipbf/monte_carlo.hpp"
#include "zipbf/poisson_fit.hpp"
#include "zipbf/priors.hpp"
#include "zipbf/regression_data.hpp"
#include "zipbf/special.hpp"

namespace zipbf::reg {

/// Finiteness diagnostics for the ZIP-regression marginal under the two
/// Jeffreys-type priors. The j = 0 condition tests whether every zero-count
/// covariate row is a nonnegative combination of the positive-count rows; the
/// j = 1 condition is full rank of A_plus.
struct IntegrabilityReport {
  enum class Recommended { j1, j0, partial, none };

  int q = 0;
  int rank_a = 0;
  int rank_a_plus = 0;
  std::vector<bool> zero_row_in_cone; // nonnegative-combination verdict per zero-count row
  bool j0_condition_ok = false;
  bool j1_condition_ok = false;
  Recommended recommended = Recommended::none;
};

inline const char* recommended_name(IntegrabilityReport::Recommended r) {
  switch (r) {
    case IntegrabilityReport::Recommended::j1: return "j1";
    case IntegrabilityReport::Recommended::j0: return "j0";
    case IntegrabilityReport::Recommended::partial: return "partial";
    case IntegrabilityReport::Recommended::none: return "none";
  }
  return "none";
}

inline IntegrabilityReport check_integrability(const RegressionData& data) {
  IntegrabilityReport rep;
  rep.q = data.q();
  rep.rank_a = num::rank_and_basis(data.A).rank;
  const int np = data.n_positive();
  rep.rank_a_plus =
      np == 0 ? 0 : num::rank_and_basis(data.positive_rows().transpose()).rank;

  rep.zero_row_in_cone.resize(data.k);
  rep.j0_condition_ok = true;
  Eigen::MatrixXd cone(data.q(), np);
  for (int m = 0; m < np; ++m) cone.col(m) = data.A.row(data.k + m).transpose();
  for (int i = 0; i < data.k; ++i) {
    const Eigen::VectorXd a = data.A.row(i).transpose();
    bool in_cone;
    if (np == 0)
      in_cone = a.norm() <= num::default_rank_tol;
    else
      in_cone = num::nnls_feasible(a, cone).feasible;
    rep.zero_row_in_cone[i] = in_cone;
    if (!in_cone) rep.j0_condition_ok = false;
  }

  rep.j1_condition_ok = (rep.rank_a_plus == rep.q);
  if (rep.rank_a < rep.q)
    rep.recommended = IntegrabilityReport::Recommended::none;
  else if (rep.j1_condition_ok)
    rep.recommended = IntegrabilityReport::Recommended::j1;
  else
    rep.recommended = IntegrabilityReport::Recommended::partial;
  return rep;
}

namespace detail {

/// Exact Gauss-Legendre rule on (0,1) for the inner p integral; the integrand
/// is a polynomial of degree n in p, so ceil((n+1)/2)+1 nodes integrate it
/// exactly.
inline std::vector<std::pair<double, double>> p_rule(int n) {
  auto rule = num::gauss_legendre_rule((n + 1) / 2 + 2);
  for (auto& [x, w] : rule) {
    x = 0.5 * (x + 1.0);
    w *= 0.5;
  }
  return rule;
}

/// ln of int_0^1 prod_{i<=k} {p + (1-p) e^{-lambda_i}} (1-p)^{n-k} dp given
/// the zero-row log lambdas.
inline double log_inner_p_integral(const Eigen::VectorXd& zero_log_lambda, int n,
                                   const std::vector<std::pair<double, double>>& rule) {
  const int k = static_cast<int>(zero_log_lambda.size());
  std::vector<double> node_terms;
  node_terms.reserve(rule.size());
  for (const auto& [p, w] : rule) {
    double g = (n - k) * std::log1p(-p);
    for (int i = 0; i < k; ++i) {
      const double lam = std::exp(zero_log_lambda(i));
      g += std::log(p + (1.0 - p) * std::exp(-lam));
    }
    node_terms.push_back(std::log(w) + g);
  }
  return num::log_sum_exp(node_terms);
}

/// Centering point and curvature for proposals/quadrature grids. Per the
/// prior's support, j = 1 centers on the positive-rows Poisson mode and j = 0
/// on the all-rows mode. The prior's lambda^{1/2}-type growth is folded in as
/// q/(2m) pseudo-counts per row, which keeps the mode interior even when the
/// plain likelihood has none (all-zero data).
inline num::PoissonMode centering(const RegressionData& data, int j) {
  const int lo = (j == 1) ? data.k : 0;
  const int rows = data.n() - lo;
  const Eigen::VectorXd tilted =
      data.counts.tail(rows).array() +
      static_cast<double>(data.q()) / (2.0 * rows);
  return num::poisson_mode(data.A.bottomRows(rows), tilted,
                           data.offsets.tail(rows));
}

/// Tensor Gauss-Legendre integration of exp(log_g) over the box
/// mode_i +- radius * max(s_i, 1), where s_i = sqrt((curvature^-1)_ii) is the
/// marginal standard deviation of the Laplace approximation. The box never
/// shrinks below raw beta units (divergence probes need the raw reach), while
/// the panel density follows s_i so concentrated integrands stay resolved.
inline num::LogEstimate tensor_quadrature(
    const std::function<double(const Eigen::VectorXd&)>& log_g,
    const Eigen::VectorXd& mode, const Eigen::MatrixXd& curvature,
    double radius) {
  const int q = static_cast<int>(mode.size());
  if (q > 3)
    throw domain_error("quadrature backend limited to q <= 3; use importance sampling");

  Eigen::MatrixXd ridged = curvature;
  Eigen::LLT<Eigen::MatrixXd> llt(ridged);
  if (llt.info() != Eigen::Success) {
    ridged.diagonal().array() += 1e-10 * (1.0 + curvature.diagonal().maxCoeff());
    llt.compute(ridged);
    if (llt.info() != Eigen::Success)
      throw numerical_error("tensor_quadrature: curvature not positive definite");
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(q, q));

  const int order = q == 1 ? 25 : (q == 2 ? 12 : 10);
  const int panel_cap = q == 1 ? 120 : (q == 2 ? 60 : 20);
  const auto base = num::gauss_legendre_rule(order);

  std::vector<std::vector<double>> nodes(q), logw(q);
  for (int d = 0; d < q; ++d) {
    const double sd = std::sqrt(cov(d, d));
    const double half = radius * std::max(sd, 1.0);
    const int panels = std::clamp(static_cast<int>(std::ceil(half / sd / 2.0)),
                                  4, panel_cap);
    const double width = 2.0 * half / panels;
    nodes[d].reserve(panels * order);
    logw[d].reserve(panels * order);
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double lo = -half + pnl * width;
      for (const auto& [x, w] : base) {
        nodes[d].push_back(mode(d) + lo + 0.5 * width * (x + 1.0));
        logw[d].push_back(std::log(0.5 * width * w));
      }
    }
  }

  num::LogSumAccumulator acc;
  Eigen::VectorXd beta(q);
  long total = 1;
  for (int d = 0; d < q; ++d) total *= static_cast<long>(nodes[d].size());
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    double lw = 0.0;
    for (int d = 0; d < q; ++d) {
      const long m = static_cast<long>(nodes[d].size());
      const long i = rem % m;
      rem /= m;
      beta(d) = nodes[d][i];
      lw += logw[d][i];
    }
    acc.add(log_g(beta) + lw);
  }

  num::LogEstimate est;
  est.log_value = acc.log_sum();
  est.rel_se = 0.0;
  est.n_evals = total;
  return est;
}

inline num::LogEstimate marginal_by_backend(
    const std::function<double(const Eigen::VectorXd&)>& log_g,
    const num::PoissonMode& center, const num::IntegrationConfig& cfg) {
  if (cfg.backend == num::IntegrationConfig::Backend::quadrature)
    return tensor_quadrature(log_g, center.mode, center.curvature,
                             cfg.truncation_radius);

  const int q = static_cast<int>(center.mode.size());
  Eigen::LLT<Eigen::MatrixXd> llt(center.curvature);
  if (llt.info() != Eigen::Success)
    throw numerical_error("importance proposal: curvature not positive definite");
  // scale root S with S S^T = inflation^2 * curvature^-1
  Eigen::MatrixXd s = Eigen::MatrixXd(llt.matrixL())
                          .triangularView<Eigen::Lower>()
                          .transpose()
                          .solve(Eigen::MatrixXd::Identity(q, q)) *
                      cfg.proposal_scale_inflation;
  num::StudentTProposal proposal(center.mode, s, cfg.proposal_df);
  return num::integrate_mc(log_g, proposal, cfg);
}

inline double log_poisson_terms(const RegressionData& data, int first_row,
                                const Eigen::VectorXd& beta) {
  double v = 0.0;
  for (int i = first_row; i < data.n(); ++i) {
    const double eta = data.offsets(i) + data.A.row(i) * beta;
    v += data.counts(i) * eta - std::exp(std::min(eta, 700.0));
  }
  return v;
}

} // namespace detail

/// ln m0^R: marginal of the Poisson regression model under the Jeffreys
/// (j = 0) or modified Jeffreys (j = 1) prior; finite for any data.
inline num::LogEstimate log_marginal_m0(const RegressionData& data, int j,
                                        const num::IntegrationConfig& cfg) {
  if (j != 0 && j != 1) throw domain_error("log_marginal_m0: j must be 0 or 1");
  cfg.validate();
  if (j == 1 && num::rank_and_basis(data.positive_rows().transpose()).rank < data.q())
    throw integrability_error(
        "modified Jeffreys prior is identically zero: rank(A_plus) < q; "
        "use the partial prior");

  const auto center = detail::centering(data, j);
  const auto log_g = [&](const Eigen::VectorXd& beta) {
    const double ll = detail::log_poisson_terms(data, 0, beta);
    if (ll == num::neg_inf) return num::neg_inf;
    const double lp = priors::log_reg_jeffreys(beta, data, j);
    return lp == num::neg_inf ? num::neg_inf : ll + lp;
  };

  double log_fact = 0.0;
  for (int i = 0; i < data.n(); ++i)
    log_fact += num::log_factorial(data.counts(i));

  auto est = detail::marginal_by_backend(log_g, center, cfg);
  est.log_value -= log_fact;
  return est;
}

/// ln m1^R: marginal of the ZIP regression model. The inner p integral is a
/// degree-n polynomial and is evaluated exactly by Gauss-Legendre; the outer
/// beta integral uses the configured backend. Unless `force` is set, the
/// prior must pass its finiteness condition; forced runs attach a
/// divergence-risk warning and, under quadrature, a nested-radius growth
/// diagnostic that can flag the estimate as divergent.
inline num::LogEstimate log_marginal_m1(const RegressionData& data, int j,
                                        const num::IntegrationConfig& cfg,
                                        bool force = false) {
  if (j != 0 && j != 1) throw domain_error("log_marginal_m1: j must be 0 or 1");
  cfg.validate();

  std::vector<std::string> warnings;
  const auto rep = check_integrability(data);
  if (j == 1 && !rep.j1_condition_ok)
    throw integrability_error(
        "modified Jeffreys prior is identically zero: rank(A_plus) = " +
        std::to_string(rep.rank_a_plus) + " < q = " + std::to_string(rep.q) +
        "; use the partial prior");
  const bool approved = (j == 1) ? rep.j1_condition_ok : rep.j0_condition_ok;
  if (!approved) {
    if (!force) {
      std::string rows;
      for (int i = 0; i < data.k; ++i)
        if (!rep.zero_row_in_cone[i]) rows += (rows.empty() ? "" : ", ") + std::to_string(i + 1);
      throw integrability_error(
          "m1 finiteness not guaranteed: zero-count row(s) " + rows +
          " are not nonnegative combinations of the positive-count rows; "
          "the marginal may be infinite (use j1 or --force)");
    }
    warnings.push_back("integrability condition not satisfied; the marginal may be "
                       "infinite (forced run)");
  }

  const auto center = detail::centering(data, j);
  const auto rule = detail::p_rule(data.n());
  const auto log_g = [&](const Eigen::VectorXd& beta) {
    const double ll_pos = detail::log_poisson_terms(data, data.k, beta);
    if (ll_pos == num::neg_inf) return num::neg_inf;
    const double lp = priors::log_reg_jeffreys(beta, data, j);
    if (lp == num::neg_inf) return num::neg_inf;
    const Eigen::VectorXd zero_eta =
        data.offsets.head(data.k) + data.A.topRows(data.k) * beta;
    return detail::log_inner_p_integral(zero_eta, data.n(), rule) + ll_pos + lp;
  };

  double log_fact = 0.0;
  for (int i = data.k; i < data.n(); ++i)
    log_fact += num::log_factorial(data.counts(i));

  num::LogEstimate est;
  const bool diagnose =
      !approved && cfg.backend == num::IntegrationConfig::Backend::quadrature;
  if (diagnose) {
    const double r = cfg.truncation_radius;
    const double e1 =
        detail::tensor_quadrature(log_g, center.mode, center.curvature, 0.25 * r)
            .log_value;
    const double e2 =
        detail::tensor_quadrature(log_g, center.mode, center.curvature, 0.5 * r)
            .log_value;
    est = detail::tensor_quadrature(log_g, center.mode, center.curvature, r);
    if (est.log_value - e2 > std::log(10.0) && e2 - e1 > 0.0) {
      est.divergent = true;
      warnings.push_back(
          "truncated estimates grow geometrically with the radius: the marginal "
          "appears to be infinite");
    }
  } else {
    est = detail::marginal_by_backend(log_g, center, cfg);
  }
  est.log_value -= log_fact;
  est.warnings.insert(est.warnings.end(), warnings.begin(), warnings.end());
  return est;
}

/// log B10 for ZIP regression vs Poisson regression under the same prior
/// variant j in both marginals (j = 1 recommended).
inline exact::BfResult log_bf_regression(const RegressionData& data, int j,
                                         const num::IntegrationConfig& cfg,
                                         bool force = false,
                                         double prior_odds = 1.0) {
  const auto m0 = log_marginal_m0(data, j, cfg);
  const auto m1 = log_marginal_m1(data, j, cfg, force);
  const double log_bf = m1.log_value - m0.log_value;
  const double rel_se = std::sqrt(m0.rel_se * m0.rel_se + m1.rel_se * m1.rel_se);
  const auto method = cfg.backend == num::IntegrationConfig::Backend::quadrature
                          ? exact::Method::regression_quadrature
                          : exact::Method::regression_mc;
  std::vector<std::string> warnings = m0.warnings;
  warnings.insert(warnings.end(), m1.warnings.begin(), m1.warnings.end());
  if (m1.divergent)
    warnings.push_back("m1 flagged divergent; the Bayes factor is unreliable");
  return exact::make_bf_result(log_bf, method, rel_se, prior_odds,
                               std::move(warnings));
}

} // namespace zipbf::reg
