#pragma once

#include <cmath>
#include <cstdint>

namespace zipbf::num {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
} // namespace detail

/// Counter-based pseudo-random stream. A (seed, stream) pair fully determines
/// the sequence, so independent substreams can be drawn in any order, in
/// parallel or serially, with bit-identical results.
class CounterRng {
public:
  static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(detail::mix64(seed ^ detail::mix64(stream ^ golden))) {}

  std::uint64_t next_u64() { return detail::mix64(base_ + golden * ++ctr_); }

  /// Uniform on (0, 1] (never 0, so it is safe under log).
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next_exponential() { return -std::log(next_unit()); }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
  /// boosting identity Gamma(a) = Gamma(a+1) * U^{1/a}.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      const double u = next_unit();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_unit();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_chi_squared(double df) { return 2.0 * next_gamma(0.5 * df); }

private:
  std::uint64_t base_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace zipbf::num
