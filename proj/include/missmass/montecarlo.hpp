#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "missmass/errors.hpp"
#include "missmass/laws.hpp"
#include "missmass/occupancy.hpp"
#include "missmass/parallel.hpp"
#include "missmass/rng.hpp"
#include "missmass/summation.hpp"

namespace missmass {

// Vose alias table: O(J) construction, O(1) draws. Draws are 0-based.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs) : prob_(probs.size()), alias_(probs.size()) {
    const std::size_t J = probs.size();
    if (J == 0) throw ParameterError("alias table needs at least one outcome");
    CompensatedSum total;
    for (double p : probs) total += p;
    const double scale = static_cast<double>(J) / total.value();
    std::vector<double> scaled(J);
    std::vector<std::uint32_t> small, large;
    small.reserve(J);
    large.reserve(J);
    for (std::size_t i = 0; i < J; ++i) {
      scaled[i] = probs[i] * scale;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) {
      prob_[i] = 1.0;
      alias_[i] = i;
    }
    for (auto i : small) {
      prob_[i] = 1.0;
      alias_[i] = i;
    }
  }

  std::size_t size() const { return prob_.size(); }

  std::size_t operator()(Rng& rng) const {
    const auto i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

inline Sample sample_iid(const DiscreteLaw& law, std::size_t n, RngStream stream) {
  std::vector<std::uint64_t> out;
  if (n == 0) return Sample{};
  const AliasTable table(law.masses());
  Rng rng(stream);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(table(rng) + 1);
  return Sample(std::move(out));
}

// Incremental occupancy state over a law's support: K_{n,1}, K_{n,2}, K_n
// and the observed mass, updated per draw. Reset is O(K_n).
class OccupancyTracker {
 public:
  // Laws at most this large compute the missing mass by scanning the
  // unseen atoms, which is exact down to the smallest mass.
  static constexpr std::size_t kDirectScanLimit = 4096;

  void reset(const DiscreteLaw& law) {
    law_ = &law;
    if (counts_.size() != law.size()) {
      counts_.assign(law.size(), 0);
    } else {
      for (auto j : touched_) counts_[j] = 0;
    }
    touched_.clear();
    n_ = k1_ = k2_ = k_ = 0;
    seen_ = CompensatedSum{};
  }

  void observe(std::size_t j) {
    const std::uint32_t c = ++counts_[j];
    ++n_;
    if (c == 1) {
      touched_.push_back(static_cast<std::uint32_t>(j));
      ++k_;
      ++k1_;
      seen_ += law_->masses()[j];
    } else if (c == 2) {
      --k1_;
      ++k2_;
    } else if (c == 3) {
      --k2_;
    }
  }

  std::uint64_t n() const { return n_; }
  std::uint64_t k1() const { return k1_; }
  std::uint64_t k2() const { return k2_; }
  std::uint64_t k() const { return k_; }
  bool exhausted() const { return k_ == law_->size(); }

  double missing_mass() const {
    if (exhausted()) return 0.0;
    if (law_->size() <= kDirectScanLimit) {
      CompensatedSum unseen;
      for (std::size_t j = 0; j < law_->size(); ++j) {
        if (counts_[j] == 0) unseen += law_->masses()[j];
      }
      return unseen.value();
    }
    return std::max(0.0, 1.0 - seen_.value());
  }

 private:
  const DiscreteLaw* law_ = nullptr;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> touched_;
  std::uint64_t n_ = 0, k1_ = 0, k2_ = 0, k_ = 0;
  CompensatedSum seen_;
};

struct RiskPoint {
  std::uint64_t n = 0;
  double mean_loss = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t exhausted_support_count = 0;
  // Diagnostics: replicate means of M_n and of the Good-Turing estimate.
  double mean_missing_mass = 0.0;
  double mean_estimate = 0.0;

  bool operator==(const RiskPoint&) const = default;
};

struct RiskCurve {
  std::vector<RiskPoint> points;

  bool operator==(const RiskCurve&) const = default;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double target_slope = 0.0;
  std::size_t points_used = 0;
};

namespace detail {

inline OccupancyTracker& thread_tracker() {
  thread_local OccupancyTracker tracker;
  return tracker;
}

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean and standard error of the finite entries of xs, in index order.
inline MeanStderr mean_stderr(std::span<const double> xs, std::uint64_t& used) {
  CompensatedSum sum;
  used = 0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++used;
    }
  }
  MeanStderr out;
  if (used == 0) return out;
  out.mean = sum.value() / static_cast<double>(used);
  if (used < 2) return out;
  CompensatedSum sq;
  for (double x : xs) {
    if (std::isfinite(x)) sq += (x - out.mean) * (x - out.mean);
  }
  out.std_error = std::sqrt(sq.value() / static_cast<double>(used - 1) / static_cast<double>(used));
  return out;
}

inline void check_ns(std::span<const std::uint64_t> ns) {
  if (ns.empty()) throw ParameterError("ns must be non-empty");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw ParameterError("every n must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw ParameterError("ns must be strictly increasing");
  }
}

}  // namespace detail

// Monte Carlo risk E|GT / M_n - 1| per n. Replicate r draws one sample path
// from stream (master_seed, r) and is evaluated at every checkpoint in ns,
// so each n sees R independent replicates. Replicates whose sample covers
// the whole support (M_n = 0) are excluded and counted.
inline RiskCurve risk_curve(const DiscreteLaw& law, std::span<const std::uint64_t> ns,
                            std::size_t replicates, std::uint64_t master_seed,
                            Workers workers = {}) {
  if (replicates < 2) throw ParameterError("risk_curve: replicates must be >= 2");
  detail::check_ns(ns);
  const std::size_t npts = ns.size();
  const AliasTable table(law.masses());
  constexpr double kExhausted = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> loss(replicates * npts), mm(replicates * npts), gt(replicates * npts);

  parallel_for(replicates, workers, [&](std::size_t r) {
    Rng rng(RngStream{master_seed, r});
    OccupancyTracker& tracker = detail::thread_tracker();
    tracker.reset(law);
    for (std::size_t i = 0; i < npts; ++i) {
      while (tracker.n() < ns[i]) tracker.observe(table(rng));
      const double estimate = static_cast<double>(tracker.k1()) / static_cast<double>(ns[i]);
      const double truth = tracker.missing_mass();
      const std::size_t slot = r * npts + i;
      mm[slot] = truth;
      gt[slot] = estimate;
      loss[slot] = truth > 0.0 ? mult_loss(estimate, truth) : kExhausted;
    }
  });

  RiskCurve curve;
  std::vector<double> column(replicates), mcol(replicates), gcol(replicates);
  for (std::size_t i = 0; i < npts; ++i) {
    for (std::size_t r = 0; r < replicates; ++r) {
      column[r] = loss[r * npts + i];
      mcol[r] = mm[r * npts + i];
      gcol[r] = gt[r * npts + i];
    }
    RiskPoint pt;
    pt.n = ns[i];
    std::uint64_t used = 0, all = 0;
    const auto ms = detail::mean_stderr(column, used);
    if (used == 0) {
      throw DegenerateError("risk_curve: every replicate exhausted the support at n = " +
                            std::to_string(ns[i]) + " (missing mass identically 0)");
    }
    pt.mean_loss = ms.mean;
    pt.std_error = ms.std_error;
    pt.replicates = used;
    pt.exhausted_support_count = replicates - used;
    pt.mean_missing_mass = detail::mean_stderr(mcol, all).mean;
    pt.mean_estimate = detail::mean_stderr(gcol, all).mean;
    curve.points.push_back(pt);
  }
  return curve;
}

// Ordinary least squares of y on x.
inline RateFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m < 3 || y.size() != m) throw InsufficientDataError("fit needs at least 3 usable points");
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / static_cast<double>(m);
  const double my = sy.value() / static_cast<double>(m);
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx.value() > 0.0)) throw InsufficientDataError("fit needs at least two distinct x values");
  RateFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  CompensatedSum ssr;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += e * e;
  }
  const double sst = syy.value();
  fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr.value() / sst, 0.0, 1.0) : 1.0;
  fit.points_used = m;
  return fit;
}

// Slope of ln(mean_loss) against ln(n), compared with the -alpha/2 target.
inline RateFit fit_rate(const RiskCurve& curve, double alpha) {
  std::vector<double> x, y;
  for (const auto& pt : curve.points) {
    if (pt.mean_loss > 0.0 && std::isfinite(pt.mean_loss) && pt.n > 0) {
      x.push_back(std::log(static_cast<double>(pt.n)));
      y.push_back(std::log(pt.mean_loss));
    }
  }
  if (x.size() < 3) throw InsufficientDataError("fit_rate: fewer than 3 points with mean_loss > 0");
  RateFit fit = fit_loglog(x, y);
  fit.target_slope = -alpha / 2.0;
  return fit;
}

struct ConcentrationReport {
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
  double expected_k1 = 0.0;
  double expected_k2 = 0.0;
  double a_n = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> empirical_exceedance;
  std::vector<double> analytic_bound;
  // Binomial allowance 3 sqrt(b (1 - b) / R) with b = min(bound, 1).
  std::vector<double> tolerance;

  bool dominated() const {
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      if (empirical_exceedance[i] > analytic_bound[i] + tolerance[i]) return false;
    }
    return true;
  }
};

inline const std::vector<double>& default_eps_grid() {
  static const std::vector<double> grid{0.05, 0.1, 0.2, 0.3, 0.5};
  return grid;
}

// A_n = E K1 / sqrt(8 max(E K1, 2 E K2) + 4/3).
inline double concentration_a_n(double expected_k1, double expected_k2) {
  return expected_k1 / std::sqrt(8.0 * std::max(expected_k1, 2.0 * expected_k2) + 4.0 / 3.0);
}

// Empirical P(|K_{n,1} / E K_{n,1} - 1| >= eps) against 4 exp(-eps^2 A_n^2).
inline ConcentrationReport concentration_check(const DiscreteLaw& law, std::uint64_t n,
                                               std::size_t replicates,
                                               std::span<const double> eps_grid,
                                               std::uint64_t master_seed, Workers workers = {}) {
  if (replicates < 1) throw ParameterError("concentration_check: replicates must be >= 1");
  if (eps_grid.empty()) throw ParameterError("concentration_check: empty eps grid");
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw ParameterError("concentration_check: eps must be > 0");
  }
  const double ek1 = n >= 1 ? expected_k_r(law, n, 1) : 0.0;
  if (!(ek1 > 0.0)) throw DegenerateError("concentration_check: E[K_{n,1}] = 0");
  const double ek2 = n >= 2 ? expected_k_r(law, n, 2) : 0.0;

  ConcentrationReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.expected_k1 = ek1;
  rep.expected_k2 = ek2;
  rep.a_n = concentration_a_n(ek1, ek2);
  rep.eps_grid.assign(eps_grid.begin(), eps_grid.end());

  const AliasTable table(law.masses());
  std::vector<double> rel(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    Rng rng(RngStream{master_seed, r});
    OccupancyTracker& tracker = detail::thread_tracker();
    tracker.reset(law);
    for (std::uint64_t i = 0; i < n; ++i) tracker.observe(table(rng));
    rel[r] = std::fabs(static_cast<double>(tracker.k1()) / ek1 - 1.0);
  });

  const double R = static_cast<double>(replicates);
  for (double eps : rep.eps_grid) {
    std::size_t hits = 0;
    for (double d : rel) hits += d >= eps ? 1 : 0;
    rep.empirical_exceedance.push_back(static_cast<double>(hits) / R);
    const double bound = 4.0 * std::exp(-eps * eps * rep.a_n * rep.a_n);
    rep.analytic_bound.push_back(bound);
    const double b = std::min(bound, 1.0);
    rep.tolerance.push_back(3.0 * std::sqrt(b * (1.0 - b) / R));
  }
  return rep;
}

// Truncation level for the geometric probe: q^J below 1e-12 / n_max, so the
// discarded tail is negligible against the smallest missing mass reachable
// at the largest sample size.
inline std::size_t geometric_probe_support(double q, std::uint64_t n_max) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("q outside (0,1)");
  const double target = std::log(1e-12) - std::log(static_cast<double>(std::max<std::uint64_t>(n_max, 1)));
  return static_cast<std::size_t>(std::ceil(target / std::log(q))) + 1;
}

// Risk curve of Good-Turing on a geometric law, where the estimator is
// inconsistent under the multiplicative loss.
inline RiskCurve geometric_inconsistency_probe(double q, std::span<const std::uint64_t> ns,
                                               std::size_t replicates, std::uint64_t master_seed,
                                               Workers workers = {}) {
  detail::check_ns(ns);
  const DiscreteLaw law = make_geometric(q, geometric_probe_support(q, ns.back()));
  return risk_curve(law, ns, replicates, master_seed, workers);
}

}  // namespace missmass
