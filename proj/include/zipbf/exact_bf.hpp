#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zipbf/errors.hpp"
#include "zipbf/integrate.hpp"
#include "zipbf/priors.hpp"
#include "zipbf/special.hpp"

namespace zipbf::exact {

/// Sufficient statistics of a count sample: size n, zero count k, total s.
/// s = 0 if and only if k = n.
struct CountSummary {
  long n = 0;
  long k = 0;
  long s = 0;
  double log_factorial_product = 0.0; // sum_i ln(x_i!)
};

inline CountSummary summarize(std::span<const long> counts) {
  if (counts.empty()) throw input_error("summarize: empty count sequence");
  CountSummary cs;
  cs.n = static_cast<long>(counts.size());
  for (long x : counts) {
    if (x < 0) throw input_error("summarize: negative count");
    if (x == 0) ++cs.k;
    cs.s += x;
    cs.log_factorial_product += num::log_factorial(static_cast<double>(x));
  }
  return cs;
}

enum class Method {
  closed_form,
  quadrature_l1,
  gamma_closed_form,
  all_zeros,
  regression_quadrature,
  regression_mc,
  rank_deficient,
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::quadrature_l1: return "quadrature_l1";
    case Method::gamma_closed_form: return "gamma_closed_form";
    case Method::all_zeros: return "all_zeros";
    case Method::regression_quadrature: return "regression_quadrature";
    case Method::regression_mc: return "regression_mc";
    case Method::rank_deficient: return "rank_deficient";
  }
  return "unknown";
}

/// Pr(M1 | x) from the log Bayes factor and the prior odds Pr(M1)/Pr(M0).
inline double posterior_prob(double log_bf10, double prior_odds) {
  if (!(prior_odds > 0.0))
    throw domain_error("posterior_prob: prior odds must be positive");
  return num::sigmoid(log_bf10 + std::log(prior_odds));
}

struct BfResult {
  double log_bf10 = 0.0;
  double bf10 = 1.0; // exp(log_bf10); may overflow to inf for extreme data
  double post_prob_m1 = 0.5;
  double prior_odds = 1.0;
  Method method = Method::closed_form;
  double rel_se = 0.0;
  std::vector<std::string> warnings;
};

inline BfResult make_bf_result(double log_bf10, Method method, double rel_se,
                               double prior_odds,
                               std::vector<std::string> warnings = {}) {
  BfResult r;
  r.log_bf10 = log_bf10;
  r.bf10 = std::exp(log_bf10);
  r.post_prob_m1 = posterior_prob(log_bf10, prior_odds);
  r.prior_odds = prior_odds;
  r.method = method;
  r.rel_se = rel_se;
  r.warnings = std::move(warnings);
  return r;
}

/// Closed-form Bayes factor of ZIP over Poisson under the 1/sqrt(lambda)
/// prior and uniform p:
///   B10 = k!/(n+1)! * sum_{j=0}^{k} (n-j)!/(k-j)! * (1 - j/n)^{-(s+1/2)}.
/// Requires s > 0; all-zero data must go through log_bf_all_zeros.
inline BfResult log_bf_jeffreys(const CountSummary& cs, double prior_odds = 1.0) {
  if (cs.s == 0)
    throw all_zeros_error("all counts are zero: the improper-prior marginal is "
                          "infinite; use the proper-prior all-zeros Bayes factor");
  const double n = static_cast<double>(cs.n);
  std::vector<double> terms(cs.k + 1);
  for (long j = 0; j <= cs.k; ++j)
    terms[j] = num::log_factorial(n - j) - num::log_factorial(static_cast<double>(cs.k - j)) -
               (cs.s + 0.5) * std::log1p(-static_cast<double>(j) / n);
  const double log_bf = num::log_factorial(static_cast<double>(cs.k)) -
                        num::log_factorial(n + 1.0) + num::log_sum_exp(terms);
  return make_bf_result(log_bf, Method::closed_form, 0.0, prior_odds);
}

/// Bayes factor under a Gamma(a, b) prior on lambda:
///   B10 = k!/(n+1)! * sum_{j=0}^{k} (n-j)!/(k-j)! * (1 - j/(n+b))^{-(s+a)}.
/// The Jeffreys closed form is the limiting case a = 1/2, b = 0. b = 0 is
/// only allowed for s > 0; at s = 0 it reduces to the all-zeros form, which
/// needs b > 0.
inline BfResult log_bf_gamma(const CountSummary& cs, double a, double b,
                             double prior_odds = 1.0) {
  if (!(a > 0.0)) throw domain_error("log_bf_gamma: a must be positive");
  if (!(b >= 0.0)) throw domain_error("log_bf_gamma: b must be nonnegative");
  if (cs.s == 0 && b == 0.0)
    throw all_zeros_error("all counts are zero: a proper prior (b > 0) is required");
  const double n = static_cast<double>(cs.n);
  std::vector<double> terms(cs.k + 1);
  for (long j = 0; j <= cs.k; ++j)
    terms[j] = num::log_factorial(n - j) - num::log_factorial(static_cast<double>(cs.k - j)) -
               (cs.s + a) * std::log1p(-static_cast<double>(j) / (n + b));
  const double log_bf = num::log_factorial(static_cast<double>(cs.k)) -
                        num::log_factorial(n + 1.0) + num::log_sum_exp(terms);
  return make_bf_result(log_bf, Method::gamma_closed_form, 0.0, prior_odds);
}

/// Bayes factor for an all-zero sample of size n under a proper Gamma(a, b)
/// prior: B10(0) = (n+b)^a/(n+1) * sum_{j=0}^{n} (j+b)^{-a} >= 1.
/// With the default a = b = 1 this is the harmonic sum 1 + 1/2 + ... + 1/(n+1),
/// which grows like log(n+1).
inline BfResult log_bf_all_zeros(long n, double a = 1.0, double b = 1.0,
                                 double prior_odds = 1.0) {
  if (n < 1) throw domain_error("log_bf_all_zeros: n must be >= 1");
  if (!(a > 0.0) || !(b > 0.0))
    throw domain_error("log_bf_all_zeros: a proper prior requires a > 0 and b > 0");
  num::LogSumAccumulator acc;
  for (long j = 0; j <= n; ++j)
    acc.add(-a * std::log(static_cast<double>(j) + b));
  const double log_bf = a * std::log(static_cast<double>(n) + b) -
                        std::log(static_cast<double>(n) + 1.0) + acc.log_sum();
  return make_bf_result(log_bf, Method::all_zeros, 0.0, prior_odds);
}

/// Bayes factor under the l = 1 prior k(lambda)/sqrt(lambda). The p integral
/// is done analytically through the binomial expansion; each remaining
/// lambda integral int e^{-(n-j) lambda} lambda^{s-1/2} k(lambda) d lambda
/// goes through adaptive quadrature. `kappa` is a test hook: substituting the
/// constant 1 reproduces the l = 0 closed form.
inline BfResult log_bf_l1(const CountSummary& cs,
                          const num::IntegrationConfig& cfg = {},
                          const std::function<double(double)>& kappa = nullptr,
                          double prior_odds = 1.0) {
  if (cs.s == 0)
    throw all_zeros_error("all counts are zero: the improper-prior marginal is "
                          "infinite; use the proper-prior all-zeros Bayes factor");
  const std::function<double(double)> kfun =
      kappa ? kappa : std::function<double(double)>(
                          [](double lam) { return priors::k_lambda(lam); });
  const double n = static_cast<double>(cs.n);
  const double s = static_cast<double>(cs.s);

  const auto lambda_integral = [&](double rate) {
    return num::integrate_1d(
        [&](double lam) {
          return -rate * lam + (s - 0.5) * std::log(lam) + std::log(kfun(lam));
        },
        cfg);
  };

  const double log_m0 = lambda_integral(n).log_value;
  std::vector<double> terms(cs.k + 1);
  for (long j = 0; j <= cs.k; ++j) {
    terms[j] = num::log_factorial(static_cast<double>(cs.k)) -
               num::log_factorial(static_cast<double>(cs.k - j)) +
               num::log_factorial(n - j) - num::log_factorial(n + 1.0) +
               lambda_integral(n - j).log_value;
  }
  const double log_bf = num::log_sum_exp(terms) - log_m0;
  return make_bf_result(log_bf, Method::quadrature_l1, 0.0, prior_odds);
}

} // namespace zipbf::exact
