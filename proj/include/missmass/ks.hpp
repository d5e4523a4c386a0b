#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "missmass/errors.hpp"

namespace missmass {

// Asymptotic 5% Kolmogorov-Smirnov constant.
inline constexpr double kKsCritical5 = 1.36;
// Acceptance thresholds sit at this multiple of the 5% critical value.
inline constexpr double kKsAcceptanceFactor = 1.5;

struct KSReport {
  double statistic = 0.0;
  std::size_t n_samples = 0;
  // Second sample size in two-sample mode, 0 otherwise.
  std::size_t n_samples_b = 0;
  double critical_value_5pct = 0.0;
  bool pass = false;
  // kKsAcceptanceFactor * critical_value_5pct and the verdict against it.
  double acceptance_threshold = 0.0;
  bool accepted = false;
};

namespace detail {

inline KSReport finish_ks(double statistic, std::size_t m1, std::size_t m2) {
  KSReport rep;
  rep.statistic = statistic;
  rep.n_samples = m1;
  rep.n_samples_b = m2;
  const double inv = m2 == 0 ? 1.0 / static_cast<double>(m1)
                             : 1.0 / static_cast<double>(m1) + 1.0 / static_cast<double>(m2);
  rep.critical_value_5pct = kKsCritical5 * std::sqrt(inv);
  rep.pass = statistic < rep.critical_value_5pct;
  rep.acceptance_threshold = kKsAcceptanceFactor * rep.critical_value_5pct;
  rep.accepted = statistic < rep.acceptance_threshold;
  return rep;
}

}  // namespace detail

// One-sample statistic sup_x |F_m(x) - cdf(x)|.
template <typename Cdf>
KSReport ks_statistic(std::span<const double> samples, Cdf&& cdf) {
  if (samples.size() < 2) throw DataError("ks_statistic: needs at least 2 samples");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, static_cast<double>(i + 1) / m - f);
    d = std::max(d, f - static_cast<double>(i) / m);
  }
  return detail::finish_ks(d, xs.size(), 0);
}

// Two-sample statistic sup_x |F_a(x) - F_b(x)|; ties are stepped together.
inline KSReport ks_two_sample(std::span<const double> samples_a, std::span<const double> samples_b) {
  if (samples_a.size() < 2 || samples_b.size() < 2) {
    throw DataError("ks_two_sample: needs at least 2 samples per arm");
  }
  std::vector<double> a(samples_a.begin(), samples_a.end());
  std::vector<double> b(samples_b.begin(), samples_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double ma = static_cast<double>(a.size());
  const double mb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / ma - static_cast<double>(j) / mb));
  }
  return detail::finish_ks(d, a.size(), b.size());
}

}  // namespace missmass
