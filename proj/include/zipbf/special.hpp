#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "zipbf/errors.hpp"

namespace zipbf::num {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0))
    throw domain_error("log_gamma: argument must be positive, got " +
                       std::to_string(x));
  return std::lgamma(x);
}

/// ln(n!) as a Gamma difference; valid for any nonnegative real n.
inline double log_factorial(double n) { return log_gamma(n + 1.0); }

/// ln sum_i exp(t_i), stable for terms up to +-1e4 and beyond.
/// -inf entries act as neutral elements; an all -inf input yields -inf.
inline double log_sum_exp(std::span<const double> terms) {
  if (terms.empty())
    throw domain_error("log_sum_exp: empty sequence");
  double m = neg_inf;
  for (double t : terms)
    if (t > m) m = t;
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& terms) {
  return log_sum_exp(std::span<const double>(terms));
}

/// Streaming log-sum-exp accumulator. Keeps a running maximum and a rescaled
/// sum so arbitrarily long streams never overflow. Addition order is the
/// caller's responsibility when bit-exact reproducibility matters.
class LogSumAccumulator {
public:
  void add(double t) {
    ++count_;
    if (t == neg_inf) return;
    if (t <= max_) {
      sum_ += std::exp(t - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - t) + 1.0;
      max_ = t;
    }
  }
  /// ln sum of everything added so far (-inf if nothing finite).
  double log_sum() const {
    if (max_ == neg_inf) return neg_inf;
    return max_ + std::log(sum_);
  }
  long count() const { return count_; }

private:
  double max_ = neg_inf;
  double sum_ = 0.0;
  long count_ = 0;
};

/// Numerically stable 1/(1+exp(-t)).
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

} // namespace zipbf::num
