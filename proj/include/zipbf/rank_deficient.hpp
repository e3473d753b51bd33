#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/exact_bf.hpp"
#include "zipbf/monte_carlo.hpp"
#include "zipbf/partial_prior.hpp"
#include "zipbf/poisson_fit.hpp"
#include "zipbf/regression_bf.hpp"
#include "zipbf/regression_data.hpp"
#include "zipbf/rng.hpp"

namespace zipbf::rankdef {

struct SelectionBf {
  std::vector<int> l_set; // 0-based rows of the reordered data
  double log_bf10 = 0.0;
  double rel_se = 0.0;
  bool finite = true;
};

struct RankDeficientResult {
  std::vector<SelectionBf> selections;
  double arithmetic_mean_bf = 0.0;
  double geometric_mean_bf = 0.0;
  int t = 0;
  int r = 0;
  int deficiency = 0;
  std::vector<std::string> warnings;
};

/// Arithmetic and geometric means of the per-selection Bayes factors. No
/// single form of average is canonical here, so both are reported and neither
/// is privileged. Non-finite selections are excluded with a warning.
inline std::pair<double, double> average_bfs(
    const std::vector<SelectionBf>& selections,
    std::vector<std::string>* warnings = nullptr) {
  std::vector<double> logs;
  for (const auto& s : selections) {
    if (s.finite && std::isfinite(s.log_bf10))
      logs.push_back(s.log_bf10);
    else if (warnings)
      warnings->push_back("selection excluded from averages: non-finite Bayes factor");
  }
  if (logs.empty())
    throw domain_error("average_bfs: no finite selections to average");
  const double arith =
      std::exp(num::log_sum_exp(logs) - std::log(static_cast<double>(logs.size())));
  double mean_log = 0.0;
  for (double v : logs) mean_log += v;
  mean_log /= static_cast<double>(logs.size());
  return {arith, std::exp(mean_log)};
}

namespace detail {

/// Offsets of the positive-rows Poisson model in the u_j = log lambda_j
/// coordinates: log lambda_m = adj_m + C(m,:) . u_j.
inline Eigen::VectorXd adjusted_offsets(const priors::PartialPriorSpec& spec,
                                        const reg::RegressionData& data) {
  Eigen::VectorXd off_j(spec.t);
  for (int i = 0; i < spec.t; ++i) off_j(i) = data.offsets(spec.j_set[i]);
  Eigen::VectorXd adj = data.positive_offsets() - spec.C * off_j;
  return adj;
}

/// One marginal (m0 or m1) under the partial prior by importance sampling in
/// (u_j, xi) coordinates: u_j from a Student-t at the positive-rows mode, xi
/// from its own Exp(1) prior so that factor cancels from the weights.
inline num::LogEstimate partial_marginal(const reg::RegressionData& data,
                                         const priors::PartialPriorSpec& spec,
                                         bool zip_model,
                                         const num::IntegrationConfig& cfg) {
  const int q = data.q();
  const int t = spec.t;
  const int qt = q - t;
  const int k = data.k;
  const int n = data.n();

  // Poisson GLM for the positive rows in u_j coordinates.
  const Eigen::VectorXd adj = adjusted_offsets(spec, data);
  const auto center = num::poisson_mode(spec.C, data.positive_counts(), adj);

  Eigen::LLT<Eigen::MatrixXd> llt(center.curvature);
  if (llt.info() != Eigen::Success)
    throw numerical_error("partial_marginal: curvature not positive definite");
  Eigen::MatrixXd s = Eigen::MatrixXd(llt.matrixL())
                          .triangularView<Eigen::Lower>()
                          .transpose()
                          .solve(Eigen::MatrixXd::Identity(t, t)) *
                      cfg.proposal_scale_inflation;
  num::ProductExpProposal<num::StudentTProposal> proposal(
      num::StudentTProposal(center.mode, s, cfg.proposal_df), qt);

  // beta solves M beta = v - a0 over the selected rows.
  Eigen::MatrixXd m(q, q);
  Eigen::VectorXd a0_sel(q);
  for (int i = 0; i < t; ++i) {
    m.row(i) = data.A.row(spec.j_set[i]);
    a0_sel(i) = data.offsets(spec.j_set[i]);
  }
  for (int w = 0; w < qt; ++w) {
    m.row(t + w) = data.A.row(spec.l_set[w]);
    a0_sel(t + w) = data.offsets(spec.l_set[w]);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> m_lu(m);
  if (!m_lu.isInvertible())
    throw numerical_error("partial_marginal: selected rows do not form a basis");

  const auto rule = reg::detail::p_rule(n);

  const auto log_g = [&](const Eigen::VectorXd& x) -> double {
    const Eigen::VectorXd u_j = x.head(t);
    Eigen::VectorXd log_xi(qt);
    double xi_sum = 0.0;
    for (int h = 0; h < qt; ++h) {
      const double xi = x(t + h);
      if (!(xi > 0.0)) return num::neg_inf;
      log_xi(h) = std::log(xi);
      xi_sum += xi;
    }
    Eigen::VectorXd v(q);
    v.head(t) = u_j;
    v.tail(qt) = spec.D * log_xi; // log lambda_l - offset_l
    for (int w = 0; w < qt; ++w) v(t + w) += data.offsets(spec.l_set[w]);
    const Eigen::VectorXd beta = m_lu.solve(v - a0_sel);

    // Positive rows from C; zero rows from beta.
    const Eigen::VectorXd log_pos = adj + spec.C * u_j;
    double ll = 0.0;
    for (int i = 0; i < n - k; ++i) {
      ll += data.counts(k + i) * log_pos(i) -
            std::exp(std::min(log_pos(i), 700.0));
    }
    const Eigen::VectorXd zero_eta =
        data.offsets.head(k) + data.A.topRows(k) * beta;
    if (zip_model) {
      ll += reg::detail::log_inner_p_integral(zero_eta, n, rule);
    } else {
      for (int i = 0; i < k; ++i) ll -= std::exp(std::min(zero_eta(i), 700.0));
    }
    if (!std::isfinite(ll) && ll != num::neg_inf) return num::neg_inf;

    // Partial-Jeffreys factor on lambda_j plus the du_j Jacobian, and the
    // Exp(1) factor on xi (which the proposal density also carries, so it
    // drops out of the importance weights).
    const double log_pj =
        -u_j.sum() + 0.5 * num::weighted_gram_log_det(spec.C, log_pos);
    return ll + log_pj + u_j.sum() - xi_sum;
  };

  double log_fact = 0.0;
  for (int i = 0; i < n; ++i) log_fact += num::log_factorial(data.counts(i));

  auto est = num::integrate_mc(log_g, proposal, cfg);
  est.log_value -= log_fact;
  return est;
}

/// Stable 64-bit key for a selection, independent of enumeration order.
inline std::uint64_t selection_key(const std::vector<int>& l_set) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (int idx : l_set)
    h = num::detail::mix64(h ^ (static_cast<std::uint64_t>(idx) + num::CounterRng::golden));
  return h;
}

} // namespace detail

/// Bayes factors under the partial prior when rank(A_plus) = t < q. One
/// deterministic default selection, or all k - r candidate l_sets when
/// `enumerate_all` is set (deficiency 1 only). m0 uses the identical partial
/// prior so that its arbitrary constants cancel from every Bayes factor.
inline RankDeficientResult log_bf_rank_deficient(const reg::RegressionData& data,
                                                 const num::IntegrationConfig& cfg,
                                                 bool enumerate_all = false) {
  cfg.validate();
  if (data.n_positive() == 0)
    throw input_error("no positive counts: the partial prior needs at least one "
                      "identified rate; for the no-covariate case use the "
                      "all-zeros test");
  const auto base = priors::build_partial_prior(data); // throws if t == q
  RankDeficientResult out;
  out.t = base.t;
  out.r = base.r;
  out.deficiency = data.q() - base.t;

  std::vector<priors::PartialPriorSpec> specs;
  if (!enumerate_all) {
    specs.push_back(base);
  } else {
    if (out.deficiency != 1)
      throw domain_error("selection enumeration is defined for rank deficiency 1 only");
    size_t skip = 0;
    for (int i = 0; i < data.k; ++i) {
      if (skip < base.in_span_rows.size() && base.in_span_rows[skip] == i) {
        ++skip;
        continue;
      }
      priors::PartialPriorSpec s = base;
      s.l_set = {i};
      s.B.resize(data.q(), 0);
      if (!priors::detail::try_extend_basis(s.B, data.A.row(i).transpose(),
                                            num::default_rank_tol))
        throw numerical_error("enumeration: degenerate zero-count row");
      s.D.resize(1, 1);
      s.D(0, 0) = s.B.col(0).dot(data.A.row(i).transpose());
      s.log_abs_det_D = std::log(std::abs(s.D(0, 0)));
      specs.push_back(std::move(s));
      if (specs.size() == 64) {
        out.warnings.push_back("selection enumeration capped at 64");
        break;
      }
    }
  }

  for (const auto& spec : specs) {
    const std::uint64_t key = detail::selection_key(spec.l_set);
    num::IntegrationConfig cfg0 = cfg;
    cfg0.seed = num::detail::mix64(cfg.seed ^ num::detail::mix64(key ^ 0x01));
    num::IntegrationConfig cfg1 = cfg;
    cfg1.seed = num::detail::mix64(cfg.seed ^ num::detail::mix64(key ^ 0x02));

    const auto m0 = detail::partial_marginal(data, spec, false, cfg0);
    const auto m1 = detail::partial_marginal(data, spec, true, cfg1);

    SelectionBf sel;
    sel.l_set = spec.l_set;
    sel.log_bf10 = m1.log_value - m0.log_value;
    sel.rel_se = std::sqrt(m0.rel_se * m0.rel_se + m1.rel_se * m1.rel_se);
    sel.finite = std::isfinite(sel.log_bf10) && !m0.divergent && !m1.divergent;
    for (const auto& w : m0.warnings) out.warnings.push_back("m0: " + w);
    for (const auto& w : m1.warnings) out.warnings.push_back("m1: " + w);
    out.selections.push_back(std::move(sel));
  }

  const auto [arith, geom] = average_bfs(out.selections, &out.warnings);
  out.arithmetic_mean_bf = arith;
  out.geometric_mean_bf = geom;
  return out;
}

} // namespace zipbf::rankdef
