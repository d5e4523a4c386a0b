#pragma once

#include <cmath>
#include <limits>

#include "missmass/errors.hpp"
#include "missmass/special.hpp"

namespace missmass {

// Shape pair of a Beta(a, b) law.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;

  bool operator==(const BetaParams&) const = default;
};

namespace detail {

inline void check_shapes(const BetaParams& p) {
  if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
    throw DomainError("Beta shapes must be positive and finite");
  }
}

inline void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x outside [0,1]");
}

// Modified Lentz evaluation of the incomplete-beta continued fraction. Near
// the switch point it needs O(sqrt(a + b)) terms; extended precision keeps
// the accumulated rounding below 1e-15 relative.
inline double ibeta_continued_fraction(double a_in, double b_in, long double x_in) {
  using real = long double;
  constexpr real kTiny = 1e-300L;
  constexpr real kEps = 1e-18L;
  constexpr int kMaxIter = 200000;
  const real a = a_in, b = b_in, x = x_in;
  const real qab = a + b;
  const real qap = a + 1;
  const real qam = a - 1;
  real c = 1;
  real d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  real h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const real md = m;
    const real m2 = 2 * md;
    real aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const real del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) return static_cast<double>(h);
  }
  throw DomainError("reg_inc_beta: continued fraction did not converge");
}

// log1p(u) - u without cancellation for small |u|.
inline double log1pmx(double u) {
  if (std::fabs(u) > 0.1) return std::log1p(u) - u;
  double term = u;
  double acc = 0.0;
  for (int k = 2; k < 60; ++k) {
    term *= -u;
    const double next = acc + term / k;
    if (next == acc) break;
    acc = next;
  }
  return acc;
}

// ln[x^a y^b / B(a, b)]. For a, b >= 10 the Stirling expansion is centred at
// the mean x0 = a / (a + b), where the first-order terms cancel exactly and
// what remains is O(1) instead of O(a + b).
inline double log_ibeta_front(double a, double b, long double x, long double y) {
  if (a >= 10.0 && b >= 10.0) {
    const long double s = static_cast<long double>(a) + b;
    const long double x0 = a / s;
    const long double y0 = b / s;
    const long double d = x <= 0.5L ? x - x0 : y0 - y;
    const double corr = lgamma_correction(a) + lgamma_correction(b) - lgamma_correction(a + b);
    return a * log1pmx(static_cast<double>(d / x0)) + b * log1pmx(static_cast<double>(-d / y0)) +
           0.5 * static_cast<double>(std::log(x0 * b)) - kLnSqrt2Pi - corr;
  }
  const auto lx = static_cast<double>(std::log(x));
  const auto ly = static_cast<double>(std::log(y));
  return a * lx + b * ly - log_beta(a, b);
}

// I_x(a, b) from a pair with x + y = 1 held in extended precision; the
// switched branch needs y to more digits than a double 1 - x carries when
// the density is steep.
inline double ibeta_xy(double a, double b, long double x, long double y) {
  if (x == 0.0L) return 0.0;
  if (y == 0.0L) return 1.0;
  const double log_front = log_ibeta_front(a, b, x, y);
  if (x < (a + 1.0L) / (a + b + 2.0L)) {
    return std::exp(log_front) * ibeta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * ibeta_continued_fraction(b, a, y) / b;
}

}  // namespace detail

inline double log_beta(const BetaParams& p) { return log_beta(p.a, p.b); }

inline double log_beta_pdf(const BetaParams& p, double x) {
  detail::check_shapes(p);
  detail::check_unit(x);
  // At an endpoint the opposite factor equals 1; only the vanishing one matters.
  auto endpoint = [&](double exponent) {
    if (exponent > 0.0) return -std::numeric_limits<double>::infinity();
    if (exponent < 0.0) throw DomainError("beta_pdf: density is infinite at this endpoint");
    return -log_beta(p.a, p.b);
  };
  if (x == 0.0) return endpoint(p.a - 1.0);
  if (x == 1.0) return endpoint(p.b - 1.0);
  return (p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) - log_beta(p.a, p.b);
}

// f_{a,b}(x). At x in {0, 1}: 0 for a positive exponent, the finite limit
// for a zero exponent, DomainError where the density diverges.
inline double beta_pdf(const BetaParams& p, double x) { return std::exp(log_beta_pdf(p, x)); }

// Regularized incomplete beta I_x(a, b), continued fraction with the
// symmetry switch at x = (a + 1) / (a + b + 2).
inline double reg_inc_beta(const BetaParams& p, double x) {
  detail::check_shapes(p);
  detail::check_unit(x);
  return detail::ibeta_xy(p.a, p.b, x, 1.0L - x);
}

// Upper tail 1 - I_x(a, b) without cancellation.
inline double reg_inc_beta_complement(const BetaParams& p, double x) {
  detail::check_shapes(p);
  detail::check_unit(x);
  return detail::ibeta_xy(p.b, p.a, 1.0L - x, x);
}

// Median by bisection on I_m(a, b) = 1/2, run until the bracket collapses
// to adjacent doubles.
inline double beta_median(const BetaParams& p) {
  detail::check_shapes(p);
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (reg_inc_beta(p, mid) < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double beta_mean(const BetaParams& p) {
  detail::check_shapes(p);
  return p.a / (p.a + p.b);
}

inline double beta_mode(const BetaParams& p) {
  detail::check_shapes(p);
  if (!(p.a > 1.0) || !(p.b > 1.0)) throw DomainError("beta_mode: requires a > 1 and b > 1");
  return (p.a - 1.0) / (p.a + p.b - 2.0);
}

}  // namespace missmass
