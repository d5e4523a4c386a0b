#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "missmass/beta.hpp"
#include "missmass/errors.hpp"
#include "missmass/ks.hpp"
#include "missmass/montecarlo.hpp"
#include "missmass/parallel.hpp"
#include "missmass/rng.hpp"
#include "missmass/summation.hpp"

namespace missmass {

// Pitman-Yor prior PY(eta, alpha). The Dirichlet process with unit mass is
// (1, 0); the alpha-stable process is (0, alpha).
struct PYParams {
  double eta = 1.0;
  double alpha = 0.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha outside [0,1)");
    if (!(eta > -alpha)) throw ParameterError("eta ≤ −alpha");
  }

  bool operator==(const PYParams&) const = default;
};

struct Partition {
  std::vector<std::uint64_t> block_sizes;
  std::uint64_t n = 0;

  std::size_t k() const { return block_sizes.size(); }
};

// Transition law of the next customer given the current blocks: entry j is
// P(join block j) = (n_j - alpha) / (eta + n), the last entry is
// P(new block) = (eta + K alpha) / (eta + n).
inline std::vector<double> seating_probabilities(const PYParams& py,
                                                 std::span<const std::uint64_t> block_sizes) {
  py.validate();
  std::uint64_t n = 0;
  for (auto s : block_sizes) n += s;
  std::vector<double> out;
  if (n == 0) {
    out.push_back(1.0);
    return out;
  }
  const double denom = py.eta + static_cast<double>(n);
  for (auto s : block_sizes) out.push_back((static_cast<double>(s) - py.alpha) / denom);
  out.push_back((py.eta + static_cast<double>(block_sizes.size()) * py.alpha) / denom);
  return out;
}

// Sequential two-parameter Chinese restaurant. Joining an existing block
// picks a uniformly random earlier customer's block (probability n_j / n)
// and accepts it with probability (n_j - alpha) / n_j, which yields the
// (n_j - alpha) weights in O(1) expected time per customer.
class ChineseRestaurant {
 public:
  explicit ChineseRestaurant(PYParams py) : py_(py) { py_.validate(); }

  void seat(Rng& rng) {
    const std::uint64_t n = owner_.size();
    bool open = n == 0;
    if (!open) {
      const double p_new =
          (py_.eta + static_cast<double>(sizes_.size()) * py_.alpha) / (py_.eta + static_cast<double>(n));
      open = rng.uniform() < p_new;
    }
    if (open) {
      owner_.push_back(static_cast<std::uint32_t>(sizes_.size()));
      sizes_.push_back(1);
      return;
    }
    for (;;) {
      const std::uint32_t j = owner_[rng.below(n)];
      const double nj = static_cast<double>(sizes_[j]);
      if (py_.alpha == 0.0 || rng.uniform() * nj < nj - py_.alpha) {
        owner_.push_back(j);
        ++sizes_[j];
        return;
      }
    }
  }

  std::uint64_t n() const { return owner_.size(); }
  std::size_t k() const { return sizes_.size(); }
  const std::vector<std::uint64_t>& block_sizes() const { return sizes_; }

 private:
  PYParams py_;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::uint32_t> owner_;
};

inline Partition crp_sample(const PYParams& py, std::uint64_t n, Rng& rng) {
  if (n < 1) throw ParameterError("crp_sample: n must be >= 1");
  ChineseRestaurant crp(py);
  for (std::uint64_t i = 0; i < n; ++i) crp.seat(rng);
  return Partition{crp.block_sizes(), n};
}

inline Partition crp_sample(const PYParams& py, std::uint64_t n, RngStream stream) {
  Rng rng(stream);
  return crp_sample(py, n, rng);
}

struct WeightedAtoms {
  std::vector<double> weights;
  double leftover = 1.0;
};

inline constexpr std::size_t kDefaultMaxSticks = 10'000'000;

// Residual allocation: V_k ~ Beta(1 - alpha, eta + k alpha),
// w_k = V_k prod_{i<k} (1 - V_i), stopped once the leftover drops below
// trunc_tol. Throws TruncationError when max_sticks is reached first.
inline WeightedAtoms stick_breaking(const PYParams& py, double trunc_tol, Rng& rng,
                                    std::size_t max_sticks = kDefaultMaxSticks) {
  py.validate();
  if (!(trunc_tol > 0.0 && trunc_tol < 1.0)) throw ParameterError("trunc_tol outside (0,1)");
  WeightedAtoms out;
  double left = 1.0;
  for (std::size_t k = 1; left >= trunc_tol; ++k) {
    if (k > max_sticks) {
      throw TruncationError("stick_breaking: leftover " + std::to_string(left) + " still above " +
                            std::to_string(trunc_tol) + " after " + std::to_string(max_sticks) +
                            " sticks (alpha too close to 1 for this tolerance)");
    }
    const double v = rng.beta(1.0 - py.alpha, py.eta + static_cast<double>(k) * py.alpha);
    out.weights.push_back(left * v);
    left *= 1.0 - v;
  }
  out.leftover = left;
  return out;
}

inline WeightedAtoms stick_breaking(const PYParams& py, double trunc_tol, RngStream stream,
                                    std::size_t max_sticks = kDefaultMaxSticks) {
  Rng rng(stream);
  return stick_breaking(py, trunc_tol, rng, max_sticks);
}

// Law of M_n given K_n = k under PY(eta, alpha): Beta(eta + k alpha, n - k alpha).
inline BetaParams posterior_mm_law(const PYParams& py, std::uint64_t k, std::uint64_t n) {
  py.validate();
  if (n < 1) throw DomainError("posterior_mm_law: n must be >= 1");
  if (k < 1 || k > n) throw DomainError("posterior_mm_law: k must lie in 1..n");
  const double a = py.eta + static_cast<double>(k) * py.alpha;
  const double b = static_cast<double>(n) - static_cast<double>(k) * py.alpha;
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("posterior_mm_law: nonpositive Beta shape");
  return {a, b};
}

// Dirichlet parameters (eta + K alpha, n_1 - alpha, ..., n_K - alpha) of the
// posterior weights; the first coordinate is the weight of the unseen part.
inline std::vector<double> posterior_weights_law(const PYParams& py,
                                                 std::span<const std::uint64_t> block_sizes) {
  py.validate();
  if (block_sizes.empty()) throw DomainError("posterior_weights_law: empty partition");
  std::vector<double> out;
  out.push_back(py.eta + static_cast<double>(block_sizes.size()) * py.alpha);
  for (auto s : block_sizes) {
    if (s < 1) throw DomainError("posterior_weights_law: block sizes must be >= 1");
    out.push_back(static_cast<double>(s) - py.alpha);
  }
  for (double v : out) {
    if (!(v > 0.0)) throw DomainError("posterior_weights_law: nonpositive Dirichlet parameter");
  }
  return out;
}

struct JointDraw {
  double missing_mass = 1.0;
  std::uint64_t k = 0;
};

inline constexpr std::size_t kDefaultPrefixAtoms = 4096;

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) {
  std::uint64_t s = master_seed ^ (tag * 0xA24BAED4963EE407ULL);
  return splitmix64_next(s);
}

// One replicate of P ~ PY, X_1..X_n iid from P, returning (M_n, K_n).
// The first sticks (until leftover < trunc_tol or prefix_atoms sticks) are
// explicit atoms sampled through an alias table together with one atom
// carrying the leftover L. The leftover is L P' with P' ~ PY(alpha,
// eta + K alpha); draws landing there are resolved exactly in order of
// discovery, whose weights are again GEM sticks.
inline JointDraw joint_draw(const PYParams& py, std::uint64_t n, double trunc_tol,
                            std::size_t prefix_atoms, Rng& rng) {
  if (n == 0) return {1.0, 0};
  std::vector<double> w;
  double left = 1.0;
  for (std::size_t k = 1; left >= trunc_tol && k <= prefix_atoms; ++k) {
    const double v = rng.beta(1.0 - py.alpha, py.eta + static_cast<double>(k) * py.alpha);
    w.push_back(left * v);
    left *= 1.0 - v;
  }
  const std::size_t prefix = w.size();
  w.push_back(left);
  const AliasTable table(w);
  std::vector<char> seen(prefix, 0);
  std::uint64_t distinct = 0;
  double tail_left = 1.0;  // unseen share of the leftover atom
  std::size_t sticks = prefix;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t j = table(rng);
    if (j < prefix) {
      if (!seen[j]) {
        seen[j] = 1;
        ++distinct;
      }
      continue;
    }
    if (rng.uniform() < 1.0 - tail_left) continue;  // an already discovered tail atom
    ++sticks;
    const double v = rng.beta(1.0 - py.alpha, py.eta + static_cast<double>(sticks) * py.alpha);
    tail_left *= 1.0 - v;
    ++distinct;
  }
  CompensatedSum unseen;
  for (std::size_t j = 0; j < prefix; ++j) {
    if (!seen[j]) unseen += w[j];
  }
  unseen += left * tail_left;
  return {unseen.value(), distinct};
}

}  // namespace detail

// R independent replicates of (M_n, K_n) under P ~ PY(eta, alpha), replicate
// r drawn from stream (master_seed, r).
inline std::vector<JointDraw> simulate_joint_mm(const PYParams& py, std::uint64_t n,
                                                std::size_t replicates, double trunc_tol,
                                                std::uint64_t master_seed, Workers workers = {},
                                                std::size_t prefix_atoms = kDefaultPrefixAtoms) {
  py.validate();
  if (!(trunc_tol > 0.0 && trunc_tol < 1.0)) throw ParameterError("trunc_tol outside (0,1)");
  if (prefix_atoms < 1) throw ParameterError("prefix_atoms must be >= 1");
  std::vector<JointDraw> out(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    Rng rng(RngStream{master_seed, r});
    out[r] = detail::joint_draw(py, n, trunc_tol, prefix_atoms, rng);
  });
  return out;
}

inline std::vector<double> missing_masses(std::span<const JointDraw> draws) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.missing_mass);
  return out;
}

// One-sample KS of simulated DP(1) missing masses against Beta(1, n), or
// against `reference` when given (negative controls).
inline KSReport dp_posterior_check(std::uint64_t n, std::size_t replicates, double trunc_tol,
                                   std::uint64_t master_seed, Workers workers = {},
                                   std::optional<BetaParams> reference = std::nullopt) {
  if (n < 1) throw ParameterError("dp_posterior_check: n must be >= 1");
  const PYParams dp{1.0, 0.0};
  const BetaParams ref = reference.value_or(posterior_mm_law(dp, 1, n));
  const auto draws = simulate_joint_mm(dp, n, replicates, trunc_tol, master_seed, workers);
  const auto ms = missing_masses(draws);
  return ks_statistic(ms, [&](double x) { return reg_inc_beta(ref, std::clamp(x, 0.0, 1.0)); });
}

// Posterior-composition draws: K_n from the CRP under PY(0, alpha), then one
// Beta(alpha K_n, n - alpha K_n) variate per replicate.
inline std::vector<double> stable_composition_draws(double alpha, std::uint64_t n,
                                                    std::size_t replicates,
                                                    std::uint64_t master_seed, Workers workers = {}) {
  const PYParams sp{0.0, alpha};
  sp.validate();
  std::vector<double> out(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    Rng rng(RngStream{master_seed, r});
    const Partition part = crp_sample(sp, n, rng);
    const BetaParams post = posterior_mm_law(sp, part.k(), n);
    out[r] = rng.beta(post.a, post.b);
  });
  return out;
}

// Two-sample KS between simulated M_n under PY(0, alpha) and the posterior
// composition built with discount composition_alpha (alpha unless a negative
// control is requested).
inline KSReport stable_posterior_check(double alpha, std::uint64_t n, std::size_t replicates,
                                       double trunc_tol, std::uint64_t master_seed,
                                       Workers workers = {},
                                       std::optional<double> composition_alpha = std::nullopt) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha outside (0,1)");
  if (n < 2) throw ParameterError("stable_posterior_check: n must be >= 2");
  const auto draws = simulate_joint_mm({0.0, alpha}, n, replicates, trunc_tol, master_seed, workers);
  const auto sim = missing_masses(draws);
  const auto comp = stable_composition_draws(composition_alpha.value_or(alpha), n, replicates,
                                             detail::derive_seed(master_seed, 1), workers);
  return ks_two_sample(sim, comp);
}

struct ConditionalPosteriorReport {
  std::uint64_t k = 0;
  BetaParams reference;
  KSReport ks;
};

// Replicates with K_n equal to its most frequent value, tested one-sample
// against Beta(alpha k, n - alpha k).
inline ConditionalPosteriorReport stable_posterior_conditional(double alpha, std::uint64_t n,
                                                               std::size_t replicates,
                                                               double trunc_tol,
                                                               std::uint64_t master_seed,
                                                               Workers workers = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha outside (0,1)");
  const PYParams sp{0.0, alpha};
  const auto draws = simulate_joint_mm(sp, n, replicates, trunc_tol, master_seed, workers);
  std::map<std::uint64_t, std::size_t> freq;
  for (const auto& d : draws) ++freq[d.k];
  std::uint64_t mode = 0;
  std::size_t best = 0;
  for (const auto& [k, c] : freq) {
    if (c > best) {
      best = c;
      mode = k;
    }
  }
  std::vector<double> ms;
  for (const auto& d : draws) {
    if (d.k == mode) ms.push_back(d.missing_mass);
  }
  ConditionalPosteriorReport rep;
  rep.k = mode;
  rep.reference = posterior_mm_law(sp, mode, n);
  rep.ks = ks_statistic(ms, [&](double x) { return reg_inc_beta(rep.reference, std::clamp(x, 0.0, 1.0)); });
  return rep;
}

// Type-7 (linear interpolation) empirical quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DataError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline const std::vector<double>& kn_quantile_levels() {
  static const std::vector<double> levels{0.05, 0.25, 0.50, 0.75, 0.95};
  return levels;
}

struct KnScalingRow {
  std::uint64_t n = 0;
  std::vector<double> quantiles;  // at kn_quantile_levels()
  double mean = 0.0;
};

struct KnScalingTable {
  PYParams py;
  // "n^alpha" for alpha > 0, "ln n" for the Dirichlet case.
  std::string normalization;
  std::vector<KnScalingRow> rows;
};

// Quantiles of K_n / n^alpha (K_n / ln n when alpha = 0). Replicate r runs a
// single restaurant from stream (master_seed, r) through every checkpoint,
// so the rows trace the almost-sure limit along common paths.
inline KnScalingTable kn_scaling(const PYParams& py, std::span<const std::uint64_t> ns,
                                 std::size_t replicates, std::uint64_t master_seed,
                                 Workers workers = {}) {
  py.validate();
  detail::check_ns(ns);
  if (replicates < 1) throw ParameterError("kn_scaling: replicates must be >= 1");
  const bool log_norm = py.alpha == 0.0;
  if (log_norm && ns.front() < 2) throw ParameterError("kn_scaling: ln n normalization needs n >= 2");
  const std::size_t npts = ns.size();
  std::vector<double> scaled(replicates * npts);
  parallel_for(replicates, workers, [&](std::size_t r) {
    Rng rng(RngStream{master_seed, r});
    ChineseRestaurant crp(py);
    for (std::size_t i = 0; i < npts; ++i) {
      while (crp.n() < ns[i]) crp.seat(rng);
      const double nd = static_cast<double>(ns[i]);
      const double norm = log_norm ? std::log(nd) : std::pow(nd, py.alpha);
      scaled[r * npts + i] = static_cast<double>(crp.k()) / norm;
    }
  });
  KnScalingTable table;
  table.py = py;
  table.normalization = log_norm ? "ln n" : "n^alpha";
  std::vector<double> col(replicates);
  for (std::size_t i = 0; i < npts; ++i) {
    CompensatedSum sum;
    for (std::size_t r = 0; r < replicates; ++r) {
      col[r] = scaled[r * npts + i];
      sum += col[r];
    }
    std::sort(col.begin(), col.end());
    KnScalingRow row;
    row.n = ns[i];
    for (double lvl : kn_quantile_levels()) row.quantiles.push_back(quantile_sorted(col, lvl));
    row.mean = sum.value() / static_cast<double>(replicates);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace missmass
