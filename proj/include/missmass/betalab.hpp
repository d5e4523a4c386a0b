#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "missmass/beta.hpp"
#include "missmass/errors.hpp"

namespace missmass {

// Second inflexion point of a bell-shaped Beta density (a, b > 3):
// mode + sqrt((a - 1)(b - 1) / (a + b - 3)) / (a + b - 2).
inline double kappa(const BetaParams& p) {
  detail::check_shapes(p);
  if (!(p.a > 3.0) || !(p.b > 3.0)) throw DomainError("kappa: requires a > 3 and b > 3");
  const double s = p.a + p.b - 2.0;
  return (p.a - 1.0) / s + std::sqrt((p.a - 1.0) * (p.b - 1.0) / (p.a + p.b - 3.0)) / s;
}

struct PsiMaximum {
  double x_star = 0.0;
  double psi_max = 0.0;
};

// psi(x) = I_{min((1 + t) x, 1)}(a, b) - I_{(1 - t) x}(a, b): the posterior
// probability that the missing mass lies within relative distance t of x.
inline double psi(const BetaParams& p, double t, double x) {
  if (x <= 0.0) return 0.0;
  const double lo = std::min((1.0 - t) * x, 1.0);
  const double hi = std::min((1.0 + t) * x, 1.0);
  if (lo >= 1.0) return 0.0;
  return reg_inc_beta(p, hi) - reg_inc_beta(p, lo);
}

// sup_{x >= 0} psi(x): dense grid over the region carrying the Beta mass,
// then golden-section refinement around the best grid point.
inline PsiMaximum psi_sup(const BetaParams& p, double t) {
  detail::check_shapes(p);
  if (!(p.a > 3.0) || !(p.b > 3.0)) throw DomainError("psi_sup: requires a > 3 and b > 3");
  if (!(t > 0.0 && t < 0.5)) throw DomainError("psi_sup: t outside (0, 1/2)");
  const double n = p.a + p.b;
  const double mean = p.a / n;
  const double sd = std::sqrt(p.a * p.b / (n * n * (n + 1.0)));
  const double x_lo = std::max(0.0, mean - 12.0 * sd) / (1.0 + t);
  const double x_hi = std::min(1.0, mean + 12.0 * sd) / (1.0 - t);
  constexpr int kGrid = 4000;
  const double h = (x_hi - x_lo) / kGrid;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = psi(p, t, x_lo + h * i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = x_lo + h * std::max(best - 1, 0);
  double b = x_lo + h * std::min(best + 1, kGrid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = psi(p, t, c);
  double fd = psi(p, t, d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = psi(p, t, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = psi(p, t, d);
    }
  }
  PsiMaximum out;
  out.x_star = 0.5 * (a + b);
  out.psi_max = psi(p, t, out.x_star);
  if (best_val > out.psi_max) {
    out.x_star = x_lo + h * best;
    out.psi_max = best_val;
  }
  return out;
}

// Smallest a for which the density-supremum bound is asserted.
inline constexpr double kLemma1MinShape = 20.0;

// 8 (a + b)^{3/2} a^{-1/2} b^{-1/2}.
inline double lemma1_bound(double a, double b) {
  return 8.0 * std::pow(a + b, 1.5) / std::sqrt(a * b);
}

// Bound minus sup_x f_{a,b}(x); positive where the density bound holds.
inline double lemma1_margin(double a, double b, double n0 = kLemma1MinShape) {
  if (!(a >= n0) || !(b > a)) throw DomainError("lemma1_margin: requires b > a >= n0");
  const BetaParams p{a, b};
  return lemma1_bound(a, b) - beta_pdf(p, beta_mode(p));
}

inline double lemma1_ratio(double a, double b) {
  const BetaParams p{a, b};
  return beta_pdf(p, beta_mode(p)) / lemma1_bound(a, b);
}

inline void check_lemma2_domain(double a, double b) {
  if (!(a > 3.0) || !(b > 3.0) || !(a < b / 2.0)) {
    throw DomainError("lemma2: requires a, b > 3 and a < b/2");
  }
}

// Probability mass of Beta(a, b) between the medians of Beta(a - 1, b) and
// Beta(a, b), via the closed form
//   m^{a-1} (1 - m)^b / ((a - 1) B(a - 1, b)),  m = median(a - 1, b).
inline double lemma2_gap(double a, double b) {
  check_lemma2_domain(a, b);
  const double m = beta_median({a - 1.0, b});
  return std::exp((a - 1.0) * std::log(m) + b * std::log1p(-m) - std::log(a - 1.0) -
                  log_beta(a - 1.0, b));
}

// Same quantity by direct CDF evaluation, I_{m(a,b)}(a, b) - I_{m(a-1,b)}(a, b).
inline double lemma2_gap_cdf(double a, double b) {
  check_lemma2_domain(a, b);
  const BetaParams p{a, b};
  return reg_inc_beta(p, beta_median(p)) - reg_inc_beta(p, beta_median({a - 1.0, b}));
}

struct ModeMedianMean {
  double mode = 0.0;
  double median = 0.0;
  double mean = 0.0;

  bool ordered() const { return mode <= median && median <= mean; }
};

// For 1 < a < b the median is bracketed by the mode and the mean.
inline ModeMedianMean mode_median_mean(const BetaParams& p) {
  return {beta_mode(p), beta_median(p), beta_mean(p)};
}

struct LemmaPoint {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double margin = 0.0;
};

struct LemmaReport {
  std::string grid;
  std::vector<LemmaPoint> points;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;

  void add(const LemmaPoint& pt) {
    points.push_back(pt);
    min_margin = std::min(min_margin, pt.margin);
    if (!(pt.margin > 0.0)) ++violations;
  }
};

// x_0 = start, x_{k+1} = ratio * x_k, kept while x_k <= stop.
inline std::vector<double> geometric_grid(double start, double stop, double ratio) {
  if (!(start > 0.0) || !(ratio > 1.0)) throw DomainError("geometric_grid: bad parameters");
  std::vector<double> out;
  for (double x = start; x <= stop * (1.0 + 1e-12); x *= ratio) out.push_back(x);
  return out;
}

// Margins of the density-supremum bound on {a_min <= a < b <= b_max}.
inline LemmaReport lemma1_sweep(double a_min, double b_max, double ratio) {
  LemmaReport rep;
  rep.grid = "geometric a,b in [" + std::to_string(a_min) + ", " + std::to_string(b_max) +
             "], ratio " + std::to_string(ratio) + ", a < b";
  const auto grid = geometric_grid(a_min, b_max, ratio);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double a = grid[i];
      const double b = grid[j];
      const BetaParams p{a, b};
      const double peak = beta_pdf(p, beta_mode(p));
      rep.add({a, b, peak, lemma1_bound(a, b) - peak});
    }
  }
  return rep;
}

// sqrt(a) * gap over the admissible grid {3 < a < b/2, a <= a_max, b <= b_max}.
// The margin is sqrt(a) * gap itself; its minimum is the measured floor.
inline LemmaReport lemma2_sweep(double a_start, double a_max, double b_max, double ratio) {
  LemmaReport rep;
  rep.grid = "geometric a in [" + std::to_string(a_start) + ", " + std::to_string(a_max) +
             "], b on the same ratio up to " + std::to_string(b_max) + ", ratio " +
             std::to_string(ratio) + ", 3 < a < b/2";
  const auto as = geometric_grid(a_start, a_max, ratio);
  const auto bs = geometric_grid(a_start, b_max, ratio);
  for (double a : as) {
    if (!(a > 3.0)) continue;
    for (double b : bs) {
      if (!(a < b / 2.0)) continue;
      const double gap = lemma2_gap(a, b);
      rep.add({a, b, gap, std::sqrt(a) * gap});
    }
  }
  return rep;
}

struct ImpossibilityResult {
  std::uint64_t n = 0;
  double eps = 0.0;
  double infimum = 1.0;
  double argmin = 0.0;
  // 1 - 2 eps / (1 - eps).
  double bound = 0.0;
  double slack = 0.0;
};

inline constexpr std::size_t kImpossibilityGridPoints = 100000;

namespace detail {

// P(|Z / x - 1| > eps) for Z ~ Beta(1, n), from the closed-form CDF
// 1 - (1 - z)^n.
inline double beta1n_relative_miss(std::uint64_t n, double eps, double x) {
  if (x <= 0.0) return 1.0;
  const double nd = static_cast<double>(n);
  auto survival = [nd](double z) {
    if (z >= 1.0) return 0.0;
    if (z <= 0.0) return 1.0;
    return std::exp(nd * std::log1p(-z));
  };
  return survival((1.0 + eps) * x) + (1.0 - survival((1.0 - eps) * x));
}

}  // namespace detail

// inf_{x >= 0} P(|Z / x - 1| > eps), Z ~ Beta(1, n). The search splits at
// x = 1/(1 + eps): a log-spaced grid on each side, the stationary point of
// the lower branch and the right-hand limit at the split.
inline ImpossibilityResult impossibility_profile(std::uint64_t n, double eps,
                                                 std::size_t grid_points = kImpossibilityGridPoints) {
  if (n < 2) throw DomainError("impossibility_profile: n must be >= 2");
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("impossibility_profile: eps outside (0, 1/4)");
  if (grid_points < 2) throw DomainError("impossibility_profile: grid too small");
  ImpossibilityResult res;
  res.n = n;
  res.eps = eps;
  res.bound = 1.0 - 2.0 * eps / (1.0 - eps);
  auto consider = [&](double x, double value) {
    if (value < res.infimum) {
      res.infimum = value;
      res.argmin = x;
    }
  };
  auto probe = [&](double x) { consider(x, detail::beta1n_relative_miss(n, eps, x)); };

  const double split = 1.0 / (1.0 + eps);
  const double nd = static_cast<double>(n);
  // Lower branch: x in (0, split].
  {
    const double lo = std::log(1e-6 / nd);
    const double hi = std::log(split);
    for (std::size_t i = 0; i < grid_points; ++i) {
      probe(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1)));
    }
    // Zero of the derivative: ((1 - (1+e)x) / (1 - (1-e)x))^{n-1} = (1-e)/(1+e).
    const double r = std::exp(std::log((1.0 - eps) / (1.0 + eps)) / (nd - 1.0));
    const double x_star = (1.0 - r) / ((1.0 + eps) - r * (1.0 - eps));
    if (x_star > 0.0 && x_star <= split) probe(x_star);
    probe(split);
  }
  // Upper branch: x in (split, 1/(1 - eps)]; beyond that the probability is 1.
  {
    const double lo = std::log(split);
    const double hi = std::log(1.0 / (1.0 - eps));
    for (std::size_t i = 1; i < grid_points; ++i) {
      probe(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1)));
    }
    // Right-hand limit at the split: 1 - (2 eps / (1 + eps))^n.
    consider(split, 1.0 - std::exp(nd * std::log(2.0 * eps / (1.0 + eps))));
  }
  res.slack = res.infimum - res.bound;
  return res;
}

}  // namespace missmass
