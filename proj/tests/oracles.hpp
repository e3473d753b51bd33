#pragma once

// Self-contained brute-force oracles for the test suites. Everything here is
// deliberately independent of the library's integration and closed-form
// paths: plain composite Simpson rules and direct model densities only.

#include <cmath>
#include <vector>

namespace oracles {

/// Composite Simpson over [a, b] with `panels` panels (panels made even).
template <typename F>
double simpson(const F& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; i += 2) acc += 4.0 * f(a + i * h);
  for (int i = 2; i < panels; i += 2) acc += 2.0 * f(a + i * h);
  return acc * h / 3.0;
}

/// Bayes factor m1/m0 for the Poisson vs ZIP test with sufficient statistics
/// (n, k, s), s > 0, under the priors pi0 = 1/sqrt(lambda), uniform p. The
/// common 1/prod(x_i!) factor cancels. Direct 2-D numerical integration; no
/// binomial expansion, no log-space tricks.
inline double brute_force_bf(int n, int k, int s) {
  // substitute lambda = u^2 so the lambda^{s-1/2} endpoint behavior becomes
  // a smooth u^{2s-1} factor that composite Simpson handles at full order
  const double u_hi = std::sqrt(60.0 + 10.0 * s);
  const int u_panels = 4000;
  const int p_panels = 150;

  const auto m0_integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double lam = u * u;
    return std::exp(-n * lam) * std::pow(u, 2 * s) * 2.0;
  };
  const double m0 = simpson(m0_integrand, 0.0, u_hi, u_panels);

  const auto m1_integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double lam = u * u;
    const double em = std::exp(-lam);
    const auto p_int = [&](double p) {
      return std::pow(p + (1.0 - p) * em, k) * std::pow(1.0 - p, n - k);
    };
    const double inner = simpson(p_int, 0.0, 1.0, p_panels);
    return inner * std::exp(-(n - k) * lam) * std::pow(u, 2 * s) * 2.0;
  };
  const double m1 = simpson(m1_integrand, 0.0, u_hi, u_panels);
  return m1 / m0;
}

} // namespace oracles
