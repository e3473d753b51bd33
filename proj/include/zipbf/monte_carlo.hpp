#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zipbf/integrate.hpp"
#include "zipbf/rng.hpp"
#include "zipbf/special.hpp"

namespace zipbf::num {

/// Elliptical Student-t proposal: x = location + scale_root * z * sqrt(df/w),
/// z standard normal, w ~ chi^2(df). scale_root may be any invertible square
/// root of the scale matrix.
class StudentTProposal {
public:
  StudentTProposal(Eigen::VectorXd location, Eigen::MatrixXd scale_root, double df)
      : location_(std::move(location)), scale_root_(std::move(scale_root)), df_(df) {
    const int q = dim();
    if (scale_root_.rows() != q || scale_root_.cols() != q)
      throw domain_error("StudentTProposal: scale_root must be q x q");
    if (!(df_ > 0.0)) throw domain_error("StudentTProposal: df must be positive");
    root_lu_.compute(scale_root_);
    if (!root_lu_.isInvertible())
      throw domain_error("StudentTProposal: scale_root is singular");
    const double log_abs_det = root_lu_.matrixLU().diagonal().array().abs().log().sum();
    log_norm_ = log_gamma(0.5 * (df_ + q)) - log_gamma(0.5 * df_) -
                0.5 * q * std::log(df_ * M_PI) - log_abs_det;
  }

  int dim() const { return static_cast<int>(location_.size()); }
  double df() const { return df_; }
  const Eigen::VectorXd& location() const { return location_; }

  Eigen::VectorXd sample(CounterRng& rng) const {
    const int q = dim();
    Eigen::VectorXd z(q);
    for (int i = 0; i < q; ++i) z(i) = rng.next_normal();
    const double w = rng.next_chi_squared(df_);
    return location_ + scale_root_ * (z * std::sqrt(df_ / w));
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = root_lu_.solve(x - location_);
    return log_norm_ - 0.5 * (df_ + dim()) * std::log1p(z.squaredNorm() / df_);
  }

private:
  Eigen::VectorXd location_;
  Eigen::MatrixXd scale_root_;
  Eigen::FullPivLU<Eigen::MatrixXd> root_lu_;
  double df_;
  double log_norm_;
};

/// Independent Exp(1) coordinates appended to an inner proposal; used where a
/// proper prior factor can be sampled exactly so its density cancels from the
/// importance weights.
template <typename Inner>
class ProductExpProposal {
public:
  ProductExpProposal(Inner inner, int exp_dims)
      : inner_(std::move(inner)), exp_dims_(exp_dims) {}

  int dim() const { return inner_.dim() + exp_dims_; }

  Eigen::VectorXd sample(CounterRng& rng) const {
    Eigen::VectorXd x(dim());
    x.head(inner_.dim()) = inner_.sample(rng);
    for (int i = 0; i < exp_dims_; ++i)
      x(inner_.dim() + i) = rng.next_exponential();
    return x;
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    double lp = inner_.log_pdf(x.head(inner_.dim()));
    for (int i = 0; i < exp_dims_; ++i) {
      const double e = x(inner_.dim() + i);
      if (!(e > 0.0)) return neg_inf;
      lp -= e;
    }
    return lp;
  }

private:
  Inner inner_;
  int exp_dims_;
};

/// Seeded importance sampling in log space.
///
/// Sample i draws from its own counter substream, and chunk statistics are
/// reduced in fixed order, so results are bit-identical for a given
/// (seed, cfg) regardless of evaluation order.
template <typename Proposal, typename LogF>
LogEstimate integrate_mc(const LogF& log_f, const Proposal& proposal,
                         const IntegrationConfig& cfg) {
  cfg.validate();
  const long n = cfg.mc_samples;
  const long chunk = 4096;
  const long n_chunks = (n + chunk - 1) / chunk;

  struct ChunkStat {
    double max = neg_inf;
    double s1 = 0.0; // sum exp(t - max)
    double s2 = 0.0; // sum exp(2(t - max))
  };
  std::vector<ChunkStat> stats(n_chunks);
  std::vector<double> buf(chunk);

  for (long c = 0; c < n_chunks; ++c) {
    const long lo = c * chunk;
    const long hi = std::min(n, lo + chunk);
    ChunkStat st;
    for (long i = lo; i < hi; ++i) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i));
      const Eigen::VectorXd x = proposal.sample(rng);
      const double t = log_f(x) - proposal.log_pdf(x);
      buf[i - lo] = t;
      if (t > st.max) st.max = t;
    }
    if (st.max > neg_inf) {
      for (long i = lo; i < hi; ++i) {
        const double d = buf[i - lo] - st.max;
        if (d == neg_inf) continue;
        const double e = std::exp(d);
        st.s1 += e;
        st.s2 += e * e;
      }
    }
    stats[c] = st;
  }

  double gmax = neg_inf;
  for (const auto& st : stats) gmax = std::max(gmax, st.max);

  LogEstimate est;
  est.n_evals = n;
  if (gmax == neg_inf) {
    est.log_value = neg_inf;
    est.warnings.push_back("all importance weights are zero");
    return est;
  }

  double s1 = 0.0, s2 = 0.0;
  for (const auto& st : stats) {
    if (st.max == neg_inf) continue;
    const double r = std::exp(st.max - gmax);
    s1 += r * st.s1;
    s2 += r * r * st.s2;
  }

  est.log_value = gmax + std::log(s1) - std::log(static_cast<double>(n));
  const double ratio = static_cast<double>(n) * s2 / (s1 * s1);
  est.rel_se = std::sqrt(std::max(0.0, (ratio - 1.0) / (n - 1.0)));

  const double ess = s1 * s1 / s2;
  if (ess < 0.01 * n)
    est.warnings.push_back("importance weights degenerate: effective sample size " +
                           std::to_string(ess) + " of " + std::to_string(n));
  if (est.rel_se == 0.0)
    est.warnings.push_back("zero weight variance: integrand proportional to proposal");
  if (est.rel_se > cfg.target_rel_se)
    est.warnings.push_back("target relative standard error not reached");
  return est;
}

} // namespace zipbf::num
