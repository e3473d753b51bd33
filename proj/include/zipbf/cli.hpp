#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "zipbf/exact_bf.hpp"
#include "zipbf/io.hpp"
#include "zipbf/priors.hpp"
#include "zipbf/rank_deficient.hpp"
#include "zipbf/regression_bf.hpp"

namespace zipbf::cli {

// Stable exit-code contract.
inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 2;
inline constexpr int exit_integrability = 3;
inline constexpr int exit_numerical = 4;

struct RunConfig {
  enum class Command { test, test_reg, check };
  enum class Format { json, text };

  Command command = Command::test;
  priors::PriorSpec prior;
  double prior_odds = 1.0;
  num::IntegrationConfig integration;
  std::string input_path;
  Format output_format = Format::json;
  bool intercept = false;
  bool force = false;
  bool enumerate_selections = false;
};

struct RunReport {
  nlohmann::json json;
  std::string text;
  int exit_code = exit_ok;
};

namespace detail {

inline nlohmann::json bf_json(const exact::BfResult& r) {
  nlohmann::json j;
  j["log_bf10"] = r.log_bf10;
  if (std::isfinite(r.bf10)) j["bf10"] = r.bf10;
  j["post_prob_m1"] = r.post_prob_m1;
  j["prior_odds"] = r.prior_odds;
  j["method"] = exact::method_name(r.method);
  j["rel_se"] = r.rel_se;
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json integrability_json(const reg::IntegrabilityReport& rep) {
  nlohmann::json j;
  j["q"] = rep.q;
  j["rank_a"] = rep.rank_a;
  j["rank_a_plus"] = rep.rank_a_plus;
  j["j0_condition_ok"] = rep.j0_condition_ok;
  j["j1_condition_ok"] = rep.j1_condition_ok;
  std::vector<int> violations;
  for (size_t i = 0; i < rep.zero_row_in_cone.size(); ++i)
    if (!rep.zero_row_in_cone[i]) violations.push_back(static_cast<int>(i) + 1);
  j["condition_411_violating_rows"] = violations;
  j["recommended_prior"] = reg::recommended_name(rep.recommended);
  return j;
}

inline std::string bf_text(const exact::BfResult& r) {
  std::ostringstream os;
  os.precision(6);
  os << "B10 = " << r.bf10 << "\n";
  os << "Pr(M1|x) = " << r.post_prob_m1 << "\n";
  os << "Pr(M0|x) = " << 1.0 - r.post_prob_m1 << "\n";
  os << "method: " << exact::method_name(r.method);
  if (r.rel_se > 0.0) os << " (rel. SE " << r.rel_se << ")";
  os << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

} // namespace detail

/// Poisson vs ZIP test on a plain counts file. Data with s > 0 route to the
/// closed forms or the l = 1 quadrature; all-zero data go to the proper-prior
/// all-zeros Bayes factor with an explanatory notice.
inline RunReport run_test(const RunConfig& cfg) {
  const auto counts = read_counts_file(cfg.input_path);
  const auto cs = exact::summarize(counts);

  exact::BfResult r;
  std::string notice;
  if (cs.s == 0) {
    double a = 1.0, b = 1.0;
    if (cfg.prior.family == priors::PriorSpec::Family::gamma) {
      a = cfg.prior.a;
      b = cfg.prior.b;
      if (!(b > 0.0))
        throw input_error("all counts are zero: the gamma prior needs b > 0");
    }
    r = exact::log_bf_all_zeros(cs.n, a, b, cfg.prior_odds);
    notice = "all counts are zero: improper priors give an infinite m1, so the "
             "proper Gamma(a=" + std::to_string(a) + ", b=" + std::to_string(b) +
             ") prior is used (default a = b = 1)";
    r.warnings.push_back(notice);
  } else if (cfg.prior.family == priors::PriorSpec::Family::gamma) {
    r = exact::log_bf_gamma(cs, cfg.prior.a, cfg.prior.b, cfg.prior_odds);
  } else if (cfg.prior.l == 1) {
    r = exact::log_bf_l1(cs, cfg.integration, nullptr, cfg.prior_odds);
  } else {
    r = exact::log_bf_jeffreys(cs, cfg.prior_odds);
  }

  RunReport rep;
  rep.json = detail::bf_json(r);
  rep.json["models"] = {{"m0", "poisson"}, {"m1", "zero_inflated_poisson"}};
  rep.json["n"] = cs.n;
  rep.json["k"] = cs.k;
  rep.json["s"] = cs.s;
  rep.json["seed"] = cfg.integration.seed;

  std::ostringstream os;
  os << "Poisson (M0) vs zero-inflated Poisson (M1)\n";
  os << "n = " << cs.n << ", zeros k = " << cs.k << ", total s = " << cs.s << "\n";
  os << detail::bf_text(r);
  rep.text = os.str();
  return rep;
}

/// Poisson regression vs ZIP regression on a CSV with design and offsets.
/// Runs the integrability check first and routes rank-deficient designs to
/// the partial prior.
inline RunReport run_test_reg(const RunConfig& cfg) {
  const auto ri = read_regression_csv(cfg.input_path, cfg.intercept);
  const auto data = reg::load_regression(ri.counts, ri.design, ri.offsets);
  const auto rep_int = check_integrability(data);

  RunReport rep;
  rep.json["models"] = {{"m0", "poisson_regression"}, {"m1", "zip_regression"}};
  rep.json["n"] = data.n();
  rep.json["k"] = data.k;
  rep.json["q"] = data.q();
  rep.json["integrability"] = detail::integrability_json(rep_int);
  rep.json["seed"] = cfg.integration.seed;
  rep.json["backend"] =
      cfg.integration.backend == num::IntegrationConfig::Backend::quadrature
          ? "quadrature"
          : "importance_sampling";

  std::ostringstream os;
  os << "Poisson regression (M0) vs ZIP regression (M1)\n";
  os << "n = " << data.n() << ", zeros k = " << data.k << ", q = " << data.q()
     << "\n";
  os << "rank(A) = " << rep_int.rank_a << ", rank(A+) = " << rep_int.rank_a_plus
     << ", recommended prior: " << reg::recommended_name(rep_int.recommended)
     << "\n";

  const bool want_partial =
      cfg.prior.family == priors::PriorSpec::Family::partial_jeffreys;
  if (want_partial || rep_int.recommended == reg::IntegrabilityReport::Recommended::partial) {
    const auto rd = rankdef::log_bf_rank_deficient(data, cfg.integration,
                                                   cfg.enumerate_selections);
    rep.json["backend"] = "importance_sampling"; // the partial path is MC-only
    const auto& head = rd.selections.front();
    auto r = exact::make_bf_result(head.log_bf10, exact::Method::rank_deficient,
                                   head.rel_se, cfg.prior_odds, rd.warnings);
    rep.json.update(detail::bf_json(r));
    rep.json["t"] = rd.t;
    rep.json["r"] = rd.r;
    rep.json["deficiency"] = rd.deficiency;
    rep.json["prior"] = "partial";
    nlohmann::json sels = nlohmann::json::array();
    for (const auto& s : rd.selections) {
      nlohmann::json sj;
      std::vector<int> rows1;
      for (int i : s.l_set) rows1.push_back(i + 1);
      sj["l_set"] = rows1;
      sj["log_bf10"] = s.log_bf10;
      const double bf = std::exp(s.log_bf10);
      if (std::isfinite(bf)) sj["bf10"] = bf;
      sj["rel_se"] = s.rel_se;
      sj["finite"] = s.finite;
      sels.push_back(sj);
    }
    rep.json["selections"] = sels;
    rep.json["bf_arithmetic_mean"] = rd.arithmetic_mean_bf;
    rep.json["bf_geometric_mean"] = rd.geometric_mean_bf;

    os << "partial prior: t = " << rd.t << ", r = " << rd.r
       << ", deficiency = " << rd.deficiency << "\n";
    for (const auto& s : rd.selections) {
      os << "  l_set {";
      for (size_t i = 0; i < s.l_set.size(); ++i)
        os << (i ? "," : "") << s.l_set[i] + 1;
      os << "}: B10 = " << std::exp(s.log_bf10) << " (rel. SE " << s.rel_se
         << ")\n";
    }
    os << "arithmetic mean B10 = " << rd.arithmetic_mean_bf
       << ", geometric mean B10 = " << rd.geometric_mean_bf << "\n";
    os << detail::bf_text(r);
  } else {
    const int j = (cfg.prior.family == priors::PriorSpec::Family::reg_jeffreys)
                      ? cfg.prior.j
                      : 1;
    const auto r =
        reg::log_bf_regression(data, j, cfg.integration, cfg.force, cfg.prior_odds);
    rep.json.update(detail::bf_json(r));
    rep.json["prior"] = j == 0 ? "j0" : "j1";
    os << "prior: " << (j == 0 ? "j0 (full Jeffreys)" : "j1 (modified Jeffreys)")
       << "\n";
    os << detail::bf_text(r);
  }
  rep.text = os.str();
  return rep;
}

/// Integrability diagnostics only.
inline RunReport run_check(const RunConfig& cfg) {
  const auto ri = read_regression_csv(cfg.input_path, cfg.intercept);
  const auto data =
      reg::load_regression(ri.counts, ri.design, ri.offsets, /*require_full_rank=*/false);
  const auto rep_int = check_integrability(data);

  RunReport rep;
  rep.json["n"] = data.n();
  rep.json["k"] = data.k;
  rep.json["q"] = data.q();
  rep.json["integrability"] = detail::integrability_json(rep_int);
  rep.exit_code = rep_int.recommended == reg::IntegrabilityReport::Recommended::none
                      ? exit_integrability
                      : exit_ok;

  std::ostringstream os;
  os << "n = " << data.n() << ", zeros k = " << data.k << ", q = " << data.q()
     << "\n";
  os << "rank(A) = " << rep_int.rank_a << ", rank(A+) = " << rep_int.rank_a_plus
     << "\n";
  if (rep_int.j1_condition_ok)
    os << "j1: finite (A+ has full rank)\n";
  else
    os << "j1: prior degenerate, rank(A+) < q\n";
  if (rep_int.j0_condition_ok) {
    os << "j0: cone condition holds (every zero-count row is a nonnegative\n      combination of positive-count rows)\n";
  } else {
    os << "j0: cone condition violated at row";
    for (size_t i = 0; i < rep_int.zero_row_in_cone.size(); ++i)
      if (!rep_int.zero_row_in_cone[i]) os << " " << i + 1;
    os << "\n";
  }
  os << "recommended: " << reg::recommended_name(rep_int.recommended) << "\n";
  rep.text = os.str();
  return rep;
}

} // namespace zipbf::cli
