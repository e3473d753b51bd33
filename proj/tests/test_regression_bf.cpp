#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "zipbf/exact_bf.hpp"
#include "zipbf/regression_bf.hpp"
#include "zipbf/regression_data.hpp"

using namespace zipbf;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using num::IntegrationConfig;
using reg::IntegrabilityReport;

namespace {

IntegrationConfig quad_cfg() { return {}; }

IntegrationConfig mc_cfg(std::uint64_t seed, int samples = 65536) {
  IntegrationConfig cfg;
  cfg.backend = IntegrationConfig::Backend::importance_sampling;
  cfg.seed = seed;
  cfg.mc_samples = samples;
  return cfg;
}

reg::RegressionData intercept_only(const std::vector<double>& counts,
                                   double offset = 0.0) {
  const int n = static_cast<int>(counts.size());
  VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = counts[i];
  return reg::load_regression(c, MatrixXd::Ones(n, 1),
                              VectorXd::Constant(n, offset));
}

// Divergent design: zero-count row (-5, 1) outside the positive rows' cone,
// with counts x2 = 2, x3 = 1.
reg::RegressionData divergent_design() {
  VectorXd counts(3);
  counts << 0, 2, 1;
  MatrixXd a(3, 2);
  a << -5, 1, 1, 0, 0, 1;
  return reg::load_regression(counts, a, VectorXd::Zero(3));
}

} // namespace

TEST_CASE("load_regression reorders zeros first and keeps the permutation") {
  VectorXd counts(3);
  counts << 1, 0, 2;
  MatrixXd a(3, 1);
  a << 10, 20, 30;
  const auto d = reg::load_regression(counts, a, VectorXd::Zero(3));
  CHECK(d.k == 1);
  CHECK(d.counts(0) == 0.0);
  CHECK(d.counts(1) == 1.0);
  CHECK(d.counts(2) == 2.0);
  CHECK(d.permutation == std::vector<int>{1, 0, 2});
  CHECK(d.A(0, 0) == 20.0);

  // identity permutation when already ordered
  VectorXd sorted(3);
  sorted << 0, 1, 2;
  const auto d2 = reg::load_regression(sorted, a, VectorXd::Zero(3));
  CHECK(d2.permutation == std::vector<int>{0, 1, 2});

  // duplicated columns: rank error
  MatrixXd dup(3, 2);
  dup << 1, 1, 2, 2, 3, 3;
  CHECK_THROWS_AS(reg::load_regression(counts, dup, VectorXd::Zero(3)),
                  design_rank_error);
}

TEST_CASE("check_integrability on the divergent design") {
  const auto rep = check_integrability(divergent_design());
  CHECK(rep.rank_a == 2);
  CHECK(rep.rank_a_plus == 2);
  CHECK(rep.j1_condition_ok);
  CHECK_FALSE(rep.j0_condition_ok);
  REQUIRE(rep.zero_row_in_cone.size() == 1);
  CHECK_FALSE(rep.zero_row_in_cone[0]);
  CHECK(rep.recommended == IntegrabilityReport::Recommended::j1);
}

TEST_CASE("check_integrability accepts nonnegative combinations") {
  // zero-count row a1 = a2 + a3
  VectorXd counts(3);
  counts << 0, 1, 3;
  MatrixXd a(3, 2);
  a << 1, 1, 1, 0, 0, 1;
  const auto rep = check_integrability(reg::load_regression(counts, a, VectorXd::Zero(3)));
  CHECK(rep.j0_condition_ok);
  CHECK(rep.j1_condition_ok);
}

TEST_CASE("check_integrability flags rank-deficient positive designs") {
  // n - k < q forces rank(A_plus) < q
  VectorXd counts(3);
  counts << 0, 0, 2;
  MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const auto rep = check_integrability(reg::load_regression(counts, a, VectorXd::Zero(3)));
  CHECK(rep.rank_a_plus == 1);
  CHECK_FALSE(rep.j1_condition_ok);
  CHECK(rep.recommended == IntegrabilityReport::Recommended::partial);
}

TEST_CASE("m0 closed-form oracle, intercept only") {
  // counts (1,2,3): m0 = sqrt(3) Gamma(6.5) 3^{-6.5} / (1! 2! 3!)
  const auto d = intercept_only({1, 2, 3});
  const auto est = reg::log_marginal_m0(d, 0, quad_cfg());
  const double expected = 0.5 * std::log(3.0) + num::log_gamma(6.5) -
                          6.5 * std::log(3.0) - std::log(12.0);
  CHECK(est.log_value == Approx(expected).epsilon(1e-9));
  CHECK(est.rel_se == 0.0);
}

TEST_CASE("m0 stays finite for all-zero counts") {
  // In beta coordinates: int e^{-n e^b} sqrt(n) e^{b/2} db = Gamma(1/2),
  // independent of n (the explicit sqrt(n) of the prior cancels the rate).
  const auto d = intercept_only({0, 0, 0});
  const auto est = reg::log_marginal_m0(d, 0, quad_cfg());
  CHECK(std::isfinite(est.log_value));
  CHECK(est.log_value == Approx(0.5 * std::log(M_PI)).epsilon(1e-8));
}

TEST_CASE("m0 backends agree within 3 standard errors") {
  const auto d = intercept_only({1, 2, 3});
  const auto q = reg::log_marginal_m0(d, 0, quad_cfg());
  const auto mc = reg::log_marginal_m0(d, 0, mc_cfg(7));
  CHECK(std::abs(q.log_value - mc.log_value) <= 3.0 * mc.rel_se);
}

TEST_CASE("regression Bayes factor matches the count-test closed form") {
  const auto d = intercept_only({0, 1, 2});
  const auto closed = exact::log_bf_jeffreys(exact::summarize(std::vector<long>{0, 1, 2}));

  for (int j : {0, 1}) {
    const auto bf = reg::log_bf_regression(d, j, quad_cfg());
    CHECK(bf.log_bf10 == Approx(closed.log_bf10).margin(1e-6));
    CHECK(bf.method == exact::Method::regression_quadrature);
  }
  const auto bf_mc = reg::log_bf_regression(d, 1, mc_cfg(11));
  CHECK(std::abs(bf_mc.log_bf10 - closed.log_bf10) <=
        std::max(1e-6, 3.0 * bf_mc.rel_se));
  CHECK(bf_mc.method == exact::Method::regression_mc);
}

TEST_CASE("zero offsets equal no offsets") {
  const auto plain = intercept_only({0, 1, 2});
  const auto trivially_offset = intercept_only({0, 1, 2}, std::log(1.0));
  const auto a = reg::log_bf_regression(plain, 1, quad_cfg());
  const auto b = reg::log_bf_regression(trivially_offset, 1, quad_cfg());
  CHECK(a.log_bf10 == Approx(b.log_bf10).margin(1e-12));
}

TEST_CASE("k = 0 data collapse the inner p integral to 1/(n+1)") {
  for (int j : {0, 1}) {
    const auto d = intercept_only({2, 1, 3, 1});
    const auto bf = reg::log_bf_regression(d, j, quad_cfg());
    CHECK(bf.log_bf10 == Approx(-std::log(5.0)).margin(1e-10));
  }
}

TEST_CASE("j0 vs j1: both finite, generally different") {
  VectorXd counts(5);
  counts << 0, 0, 1, 2, 4;
  MatrixXd a(5, 2);
  a << 1, 0.5, 1, 1.0, 1, 0.0, 1, 0.7, 1, 0.2;
  // zero rows within the cone of positive rows: row1 = (1,0.5), row2 = (1,1):
  // (1,0.5) = 0.5*(1,0)+0.5*(1,1)? = (1,0.5) yes; (1,1) is itself positive? no,
  // check: (1,1) = 1*(1,0.7)+...; nnls decides, we only require both finite.
  const auto d = reg::load_regression(counts, a, VectorXd::Zero(5));
  const auto rep = check_integrability(d);
  REQUIRE(rep.j1_condition_ok);

  const auto b1 = reg::log_bf_regression(d, 1, quad_cfg());
  CHECK(std::isfinite(b1.log_bf10));
  if (rep.j0_condition_ok) {
    const auto b0 = reg::log_bf_regression(d, 0, quad_cfg());
    CHECK(std::isfinite(b0.log_bf10));
    CHECK(b0.log_bf10 != b1.log_bf10);
  }
}

TEST_CASE("intercept-only random instances reduce to the closed form") {
  std::mt19937_64 gen(37);
  for (int rep = 0; rep < 3; ++rep) {
    const int n = std::uniform_int_distribution<int>(3, 10)(gen);
    std::vector<double> counts(n);
    std::vector<long> counts_l(n);
    long s = 0;
    for (int i = 0; i < n; ++i) {
      counts[i] = std::uniform_int_distribution<int>(0, 4)(gen);
      counts_l[i] = static_cast<long>(counts[i]);
      s += counts_l[i];
    }
    if (s == 0) counts[0] = counts_l[0] = 1;
    const auto closed = exact::log_bf_jeffreys(exact::summarize(counts_l));
    const auto d = intercept_only(counts);
    for (int j : {0, 1}) {
      const auto q = reg::log_bf_regression(d, j, quad_cfg());
      CHECK(q.log_bf10 == Approx(closed.log_bf10).margin(1e-6));
      const auto mc = reg::log_bf_regression(d, j, mc_cfg(100 + rep, 16384));
      CHECK(std::abs(mc.log_bf10 - closed.log_bf10) <=
            std::max(1e-6, 3.0 * mc.rel_se));
    }
  }
}

TEST_CASE("marginals are invariant under row permutations") {
  // zero rows sit inside the positive rows' cone so both priors are usable
  VectorXd counts(4);
  counts << 2, 0, 1, 0;
  MatrixXd a(4, 2);
  a << 1, 0.3, 1, 0.4, 1, 0.9, 1, 0.6;
  VectorXd off(4);
  off << 0.1, 0.0, -0.3, 0.2;
  const auto d1 = reg::load_regression(counts, a, off);

  std::vector<int> perm{3, 1, 0, 2};
  VectorXd counts2(4), off2(4);
  MatrixXd a2(4, 2);
  for (int i = 0; i < 4; ++i) {
    counts2(i) = counts(perm[i]);
    off2(i) = off(perm[i]);
    a2.row(i) = a.row(perm[i]);
  }
  const auto d2 = reg::load_regression(counts2, a2, off2);

  for (int j : {0, 1}) {
    CHECK(reg::log_marginal_m0(d1, j, quad_cfg()).log_value ==
          Approx(reg::log_marginal_m0(d2, j, quad_cfg()).log_value).margin(1e-12));
    CHECK(reg::log_marginal_m1(d1, j, quad_cfg()).log_value ==
          Approx(reg::log_marginal_m1(d2, j, quad_cfg()).log_value).margin(1e-12));
  }
}

TEST_CASE("offset shift against intercept leaves the marginals invariant") {
  const std::vector<double> counts{0, 1, 2, 4};
  const auto base = intercept_only(counts, 0.0);
  const auto shifted = intercept_only(counts, 0.8);
  for (int j : {0, 1}) {
    // the quadrature grid re-centers on the shifted mode automatically
    CHECK(reg::log_marginal_m0(base, j, quad_cfg()).log_value ==
          Approx(reg::log_marginal_m0(shifted, j, quad_cfg()).log_value)
              .margin(1e-8));
    CHECK(reg::log_marginal_m1(base, j, quad_cfg()).log_value ==
          Approx(reg::log_marginal_m1(shifted, j, quad_cfg()).log_value)
              .margin(1e-8));
  }
}

TEST_CASE("sandwich inequality for the ZIP regression density") {
  // p^k (1-p)^{n-k} prod_+ Poisson <= f1 <= prod_+ Poisson
  std::mt19937_64 gen(53);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> up(0.01, 0.99);
  VectorXd counts(4);
  counts << 0, 0, 2, 1;
  MatrixXd a(4, 2);
  a << 1, 0.4, 1, -0.6, 1, 0.1, 1, 0.8;
  const auto d = reg::load_regression(counts, a, VectorXd::Zero(4));

  for (int rep = 0; rep < 200; ++rep) {
    VectorXd beta(2);
    beta << nd(gen), nd(gen);
    const double p = up(gen);

    double log_pos = 0.0; // positive-count Poisson product, with factorials
    for (int i = d.k; i < d.n(); ++i) {
      const double eta = d.offsets(i) + d.A.row(i) * beta;
      log_pos += d.counts(i) * eta - std::exp(eta) -
                 num::log_factorial(d.counts(i));
    }
    double log_f1 = (d.n() - d.k) * std::log1p(-p) + log_pos;
    for (int i = 0; i < d.k; ++i) {
      const double lam = std::exp(d.offsets(i) + d.A.row(i) * beta);
      log_f1 += std::log(p + (1.0 - p) * std::exp(-lam));
    }
    const double lower =
        d.k * std::log(p) + (d.n() - d.k) * std::log1p(-p) + log_pos;
    CHECK(log_f1 >= lower - 1e-12);
    CHECK(log_f1 <= log_pos + 1e-12);
  }
}

TEST_CASE("divergent design: refusal, forced divergence diagnostic") {
  const auto d = divergent_design();

  // j0 is refused without force
  CHECK_THROWS_AS(reg::log_marginal_m1(d, 0, quad_cfg(), false),
                  integrability_error);
  CHECK_THROWS_AS(reg::log_bf_regression(d, 0, quad_cfg(), false),
                  integrability_error);

  // forced truncated estimates grow without bound: radii 5, 10, 20
  IntegrationConfig c5 = quad_cfg(), c10 = quad_cfg(), c20 = quad_cfg();
  c5.truncation_radius = 5;
  c10.truncation_radius = 10;
  c20.truncation_radius = 20;
  const double e5 = reg::log_marginal_m1(d, 0, c5, true).log_value;
  const double e10 = reg::log_marginal_m1(d, 0, c10, true).log_value;
  const auto est20 = reg::log_marginal_m1(d, 0, c20, true);
  CHECK(e10 > e5);
  CHECK(est20.log_value > e10);
  CHECK(est20.log_value - e10 > std::log(10.0));
  CHECK(est20.divergent);

  // j1 remains legitimate on the same data
  const auto b1 = reg::log_bf_regression(d, 1, quad_cfg());
  CHECK(std::isfinite(b1.log_bf10));
}

TEST_CASE("q = 4 importance sampling against a block-factorization oracle") {
  // Block-diagonal design: both the likelihood and the weighted-Gram prior
  // factorize over the blocks, so m0(q=4) = m0(block1) * m0(block2).
  VectorXd c1(4), c2(4);
  c1 << 0, 1, 2, 1;
  c2 << 1, 0, 3, 2;
  MatrixXd a1(4, 2), a2(4, 2);
  a1 << 1, 0.2, 1, -0.5, 1, 0.8, 1, 0.1;
  a2 << 1, -0.3, 1, 0.6, 1, 0.4, 1, -0.8;

  VectorXd counts(8);
  counts << c1, c2;
  MatrixXd a = MatrixXd::Zero(8, 4);
  a.topLeftCorner(4, 2) = a1;
  a.bottomRightCorner(4, 2) = a2;

  const auto block1 = reg::load_regression(c1, a1, VectorXd::Zero(4));
  const auto block2 = reg::load_regression(c2, a2, VectorXd::Zero(4));
  const auto joint = reg::load_regression(counts, a, VectorXd::Zero(8));

  const double oracle = reg::log_marginal_m0(block1, 0, quad_cfg()).log_value +
                        reg::log_marginal_m0(block2, 0, quad_cfg()).log_value;
  const auto mc = reg::log_marginal_m0(joint, 0, mc_cfg(2025));
  CHECK(std::abs(mc.log_value - oracle) <= 3.0 * mc.rel_se);
}

TEST_CASE("quadrature rejects q > 3") {
  VectorXd counts(6);
  counts << 0, 1, 2, 1, 3, 2;
  MatrixXd a = MatrixXd::Random(6, 4);
  a.col(0).setOnes();
  const auto d = reg::load_regression(counts, a, VectorXd::Zero(6));
  CHECK_THROWS_AS(reg::log_marginal_m0(d, 1, quad_cfg()), domain_error);
}
