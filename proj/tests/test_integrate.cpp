#include <catch2/catch.hpp>

#include <cmath>

#include "zipbf/integrate.hpp"
#include "zipbf/special.hpp"

using namespace zipbf;
using num::IntegrationConfig;

TEST_CASE("integrate_1d unit exponential") {
  const auto est = num::integrate_1d([](double lam) { return -lam; });
  CHECK(est.log_value == Approx(0.0).margin(1e-9));
  CHECK(est.rel_se == 0.0);
  CHECK(est.n_evals > 0);
}

TEST_CASE("integrate_1d handles the sqrt singularity at zero") {
  // int e^-lam lam^-1/2 = Gamma(1/2) = sqrt(pi)
  const auto est = num::integrate_1d(
      [](double lam) { return -lam - 0.5 * std::log(lam); });
  CHECK(est.log_value == Approx(0.5 * std::log(M_PI)).epsilon(1e-9));
}

TEST_CASE("integrate_1d gamma integral with rate") {
  // int e^-2lam lam^{3/2} = Gamma(5/2) 2^{-5/2}
  const auto est = num::integrate_1d(
      [](double lam) { return -2.0 * lam + 1.5 * std::log(lam); });
  const double expected = num::log_gamma(2.5) - 2.5 * std::log(2.0);
  CHECK(est.log_value == Approx(expected).epsilon(1e-9));
}

TEST_CASE("integrate_1d reproduces the gamma family over a grid") {
  // int_0^inf e^{-c lam} lam^{z-1} d lam = Gamma(z) c^-z
  for (double z : {0.5, 1.0, 2.5, 7.0}) {
    for (double c : {0.5, 1.0, 3.0}) {
      const auto est = num::integrate_1d([z, c](double lam) {
        return -c * lam + (z - 1.0) * std::log(lam);
      });
      const double expected = num::log_gamma(z) - z * std::log(c);
      INFO("z=" << z << " c=" << c);
      CHECK(est.log_value == Approx(expected).epsilon(1e-9).margin(1e-9));
    }
  }
}

TEST_CASE("integrate_1d survives extreme scale factors") {
  // 1e250 * exp(-lam): the shift normalization must absorb the constant.
  const auto est = num::integrate_1d(
      [](double lam) { return 575.6462732485114 - lam; });
  CHECK(est.log_value == Approx(575.6462732485114).epsilon(1e-9));
}

TEST_CASE("integration config validation") {
  IntegrationConfig cfg;
  cfg.mc_samples = 512;
  CHECK_THROWS_AS(cfg.validate(), domain_error);
  cfg = {};
  cfg.target_rel_se = 1.5;
  CHECK_THROWS_AS(cfg.validate(), domain_error);
  cfg = {};
  cfg.proposal_scale_inflation = 0.5;
  CHECK_THROWS_AS(cfg.validate(), domain_error);
}

TEST_CASE("gauss_legendre_rule integrates polynomials exactly") {
  for (int order : {2, 5, 16, 97}) {
    const auto rule = num::gauss_legendre_rule(order);
    double total = 0.0;
    for (const auto& [x, w] : rule) total += w;
    CHECK(total == Approx(2.0).epsilon(1e-13));
    // degree 2*order-1 monomial over [-1,1]
    const int d = 2 * order - 2; // even degree, nonzero integral
    double val = 0.0;
    for (const auto& [x, w] : rule) val += w * std::pow(x, d);
    CHECK(val == Approx(2.0 / (d + 1)).epsilon(1e-10));
  }
}
