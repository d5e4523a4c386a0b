#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "missmass/errors.hpp"

namespace missmass {

namespace detail {

// Stirling-series remainder: lgamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)].
// Eight Bernoulli terms; absolute error below 1e-17 for x >= 10.
inline double lgamma_correction(double x) {
  constexpr double c[] = {
      1.0 / 12.0,         -1.0 / 360.0,  1.0 / 1260.0, -1.0 / 1680.0,
      1.0 / 1188.0,       -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0};
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double acc = 0.0;
  for (int k = 7; k >= 0; --k) acc = acc * inv2 + c[k];
  return acc * inv;
}

inline constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

}  // namespace detail

// ln B(a, b). For large arguments the lgamma terms are combined analytically
// so the leading (x - 1/2) ln x pieces cancel before rounding.
inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("log_beta: parameters must be positive and finite");
  }
  const double p = std::fmin(a, b);
  const double q = std::fmax(a, b);
  const double pq = p + q;
  using detail::lgamma_correction;
  if (p >= 10.0) {
    const double corr = lgamma_correction(p) + lgamma_correction(q) - lgamma_correction(pq);
    return -0.5 * std::log(q) + detail::kLnSqrt2Pi + corr + (p - 0.5) * std::log(p / pq) +
           q * std::log1p(-p / pq);
  }
  if (q >= 10.0) {
    const double corr = lgamma_correction(q) - lgamma_correction(pq);
    return std::lgamma(p) + corr + p - p * std::log(pq) + (q - 0.5) * std::log1p(-p / pq);
  }
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(pq);
}

// ln C(n, r) through ln B, exact for r in {0, 1, n - 1, n}.
inline double log_choose(std::uint64_t n, std::uint64_t r) {
  if (r > n) throw DomainError("log_choose: r > n");
  if (r == 0 || r == n) return 0.0;
  if (r == 1 || r == n - 1) return std::log(static_cast<double>(n));
  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(r);
  return -std::log1p(nd) - log_beta(nd - rd + 1.0, rd + 1.0);
}

}  // namespace missmass
