#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "missmass/errors.hpp"
#include "missmass/occupancy.hpp"
#include "missmass/special.hpp"
#include "missmass/summation.hpp"

namespace missmass {

enum class Family { zipf, zipf_log, geometric, explicit_masses };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::zipf: return "zipf";
    case Family::zipf_log: return "zipf-log";
    case Family::geometric: return "geometric";
    case Family::explicit_masses: return "explicit";
  }
  return "unknown";
}

inline Family family_from_string(std::string_view s) {
  if (s == "zipf") return Family::zipf;
  if (s == "zipf-log") return Family::zipf_log;
  if (s == "geometric") return Family::geometric;
  if (s == "explicit") return Family::explicit_masses;
  throw ParameterError("unknown law family '" + std::string(s) + "'");
}

inline constexpr double kDefaultTruncationTolerance = 1e-6;

// A truncated, normalized, non-increasing mass sequence p_1 >= ... >= p_J > 0.
// Immutable after construction; share by const reference.
class DiscreteLaw {
 public:
  Family family() const { return family_; }
  // Tail index (zipf families); NaN otherwise.
  double alpha() const { return alpha_; }
  // Exponent of the (1 + ln j) slowly varying correction (zipf-log only).
  double beta_log() const { return beta_log_; }
  // Geometric ratio (geometric only).
  double q() const { return q_; }
  std::size_t size() const { return masses_.size(); }
  std::span<const double> masses() const { return masses_; }
  // 1-based mass p_j.
  double mass(std::size_t j) const { return masses_.at(j - 1); }
  // Discarded tail mass relative to the kept pre-normalization total.
  double residual() const { return residual_; }
  // Pre-normalization total of the kept weights (Z_J for the zipf family).
  double normalizer() const { return normalizer_; }

  bool within_truncation_tolerance(double delta = kDefaultTruncationTolerance) const {
    return residual_ < delta;
  }

 private:
  DiscreteLaw() = default;

  friend DiscreteLaw make_zipf(double, std::size_t);
  friend DiscreteLaw make_zipf_log(double, double, std::size_t);
  friend DiscreteLaw make_geometric(double, std::size_t);
  friend DiscreteLaw make_explicit(std::span<const double>);

  static DiscreteLaw normalized(Family family, std::vector<double> weights) {
    DiscreteLaw law;
    law.family_ = family;
    CompensatedSum z;
    for (double w : weights) z += w;
    law.normalizer_ = z.value();
    for (double& w : weights) w /= law.normalizer_;
    if (!(weights.back() > 0.0)) {
      throw ParameterError("smallest mass underflows to 0; lower J for these parameters");
    }
    law.masses_ = std::move(weights);
    return law;
  }

  Family family_ = Family::explicit_masses;
  double alpha_ = std::numeric_limits<double>::quiet_NaN();
  double beta_log_ = 0.0;
  double q_ = std::numeric_limits<double>::quiet_NaN();
  double residual_ = 0.0;
  double normalizer_ = 1.0;
  std::vector<double> masses_;
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha outside (0,1)");
}

inline void check_support(std::size_t J) {
  if (J == 0) throw ParameterError("truncation level J must be >= 1");
}

// Integral of x^{-s} (1 + ln x)^beta over [J, inf), substituting
// v = (s - 1)(ln x - ln J) and applying composite Simpson on v in [0, 80].
inline double log_corrected_tail_integral(double s, double beta, double J) {
  const double lnJ = std::log(J);
  const double scale = std::exp((1.0 - s) * lnJ) / (s - 1.0);
  constexpr int kIntervals = 8000;
  constexpr double kUpper = 80.0;
  const double h = kUpper / kIntervals;
  auto f = [&](double v) { return std::exp(-v) * std::pow(1.0 + lnJ + v / (s - 1.0), beta); };
  CompensatedSum acc;
  acc += f(0.0) + f(kUpper);
  for (int i = 1; i < kIntervals; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  return scale * acc.value() * h / 3.0;
}

}  // namespace detail

// p_j proportional to j^{-1/alpha}, j = 1..J. The residual is the
// Euler-Maclaurin estimate of sum_{i > J} i^{-1/alpha}, relative to Z_J.
inline DiscreteLaw make_zipf(double alpha, std::size_t J) {
  detail::check_alpha(alpha);
  detail::check_support(J);
  const double s = 1.0 / alpha;
  std::vector<double> w(J);
  for (std::size_t j = 1; j <= J; ++j) w[j - 1] = std::exp(-s * std::log(static_cast<double>(j)));
  DiscreteLaw law = DiscreteLaw::normalized(Family::zipf, std::move(w));
  law.alpha_ = alpha;
  const double Jd = static_cast<double>(J);
  const double fJ = std::exp(-s * std::log(Jd));
  const double tail = Jd * fJ / (s - 1.0) - 0.5 * fJ + s * fJ / (12.0 * Jd);
  law.residual_ = tail / law.normalizer_;
  return law;
}

// p_j proportional to j^{-1/alpha} (1 + ln j)^{beta_log}, with the monotone
// envelope p_j <- min(p_j, p_{j-1}) applied before normalization.
inline DiscreteLaw make_zipf_log(double alpha, double beta_log, std::size_t J) {
  detail::check_alpha(alpha);
  detail::check_support(J);
  if (!std::isfinite(beta_log)) throw ParameterError("beta_log must be finite");
  const double s = 1.0 / alpha;
  std::vector<double> w(J);
  for (std::size_t j = 1; j <= J; ++j) {
    const double lj = std::log(static_cast<double>(j));
    double v = std::exp(-s * lj + beta_log * std::log1p(lj));
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ParameterError("zipf-log weights are not positive and finite");
    }
    if (j > 1) v = std::min(v, w[j - 2]);
    w[j - 1] = v;
  }
  DiscreteLaw law = DiscreteLaw::normalized(Family::zipf_log, std::move(w));
  law.alpha_ = alpha;
  law.beta_log_ = beta_log;
  law.residual_ =
      detail::log_corrected_tail_integral(s, beta_log, static_cast<double>(J)) / law.normalizer_;
  return law;
}

// p_j proportional to (1 - q) q^{j-1}; residual = q^J.
inline DiscreteLaw make_geometric(double q, std::size_t J) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("q outside (0,1)");
  detail::check_support(J);
  std::vector<double> w(J);
  const double lq = std::log(q);
  for (std::size_t j = 1; j <= J; ++j) w[j - 1] = (1.0 - q) * std::exp(lq * static_cast<double>(j - 1));
  DiscreteLaw law = DiscreteLaw::normalized(Family::geometric, std::move(w));
  law.q_ = q;
  law.residual_ = std::pow(q, static_cast<double>(J));
  return law;
}

// Any positive finite weights; sorted non-increasing and normalized.
inline DiscreteLaw make_explicit(std::span<const double> weights) {
  if (weights.empty()) throw ParameterError("explicit law needs at least one mass");
  std::vector<double> w(weights.begin(), weights.end());
  for (double x : w) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("explicit masses must be positive");
  }
  std::sort(w.begin(), w.end(), std::greater<>());
  return DiscreteLaw::normalized(Family::explicit_masses, std::move(w));
}

inline DiscreteLaw make_explicit(std::initializer_list<double> weights) {
  return make_explicit(std::span<const double>(weights.begin(), weights.size()));
}

// Serializable description of a law: family and parameters, plus the mass
// list for explicit laws only.
struct LawSpec {
  Family family = Family::zipf;
  double alpha = 0.5;
  double beta_log = 0.0;
  double q = 0.5;
  std::size_t J = 1000;
  std::vector<double> masses;

  bool operator==(const LawSpec&) const = default;
};

inline DiscreteLaw make_law(const LawSpec& spec) {
  switch (spec.family) {
    case Family::zipf: return make_zipf(spec.alpha, spec.J);
    case Family::zipf_log: return make_zipf_log(spec.alpha, spec.beta_log, spec.J);
    case Family::geometric: return make_geometric(spec.q, spec.J);
    case Family::explicit_masses: return make_explicit(spec.masses);
  }
  throw ParameterError("unknown law family");
}

// nu_bar(x) = #{j : p_j >= x}.
inline std::size_t tail_count(const DiscreteLaw& law, double x) {
  if (!(x > 0.0)) throw ParameterError("tail_count: x must be > 0");
  const auto m = law.masses();
  const auto it = std::partition_point(m.begin(), m.end(), [x](double p) { return p >= x; });
  return static_cast<std::size_t>(it - m.begin());
}

// M_n = 1 - sum of masses of the distinct observed atoms.
inline double missing_mass_exact(const DiscreteLaw& law, const Sample& sample) {
  if (sample.empty()) return 1.0;
  const std::size_t J = law.size();
  std::vector<char> seen(J, 0);
  std::size_t distinct = 0;
  for (auto idx : sample.indices()) {
    if (idx > J) throw DataError("sample index outside the law's support");
    if (!seen[idx - 1]) {
      seen[idx - 1] = 1;
      ++distinct;
    }
  }
  if (distinct == J) return 0.0;
  CompensatedSum unseen;
  for (std::size_t j = 0; j < J; ++j) {
    if (!seen[j]) unseen += law.masses()[j];
  }
  return unseen.value();
}

// E[M_n] = sum_j p_j (1 - p_j)^n.
inline double expected_missing_mass(const DiscreteLaw& law, std::uint64_t n) {
  if (n == 0) return 1.0;
  const double nd = static_cast<double>(n);
  CompensatedSum acc;
  for (double p : law.masses()) acc += p * std::exp(nd * std::log1p(-p));
  return acc.value();
}

// E[K_{n,r}] = C(n, r) sum_j p_j^r (1 - p_j)^{n-r}, binomial in log space.
inline double expected_k_r(const DiscreteLaw& law, std::uint64_t n, std::uint64_t r) {
  if (r < 1 || r > n) throw ParameterError("expected_k_r: r must lie in 1..n");
  const double lc = log_choose(n, r);
  const double rd = static_cast<double>(r);
  const double rest = static_cast<double>(n - r);
  CompensatedSum acc;
  for (double p : law.masses()) {
    double log_term = lc + rd * std::log(p);
    if (n > r) log_term += rest * std::log1p(-p);
    acc += std::exp(log_term);
  }
  return acc.value();
}

// E_P(GT) - E_P(M_n) = sum_j p_j^2 (1 - p_j)^{n-1}; lies in [0, 1/n].
inline double gt_bias_exact(const DiscreteLaw& law, std::uint64_t n) {
  if (n < 1) throw ParameterError("gt_bias_exact: n must be >= 1");
  const double e = static_cast<double>(n - 1);
  CompensatedSum acc;
  for (double p : law.masses()) {
    const double decay = n == 1 ? 1.0 : std::exp(e * std::log1p(-p));
    acc += p * p * decay;
  }
  return acc.value();
}

// E[K_{n,1}] divided by its regular-variation asymptote alpha Gamma(1-alpha)
// l n^alpha, with l = Z_J^{-alpha} for the pure zipf family.
inline double karlin_ratio(const DiscreteLaw& law, std::uint64_t n) {
  if (law.family() != Family::zipf) {
    throw UnsupportedFamilyError("karlin_ratio: defined for the pure zipf family only");
  }
  if (n < 1) throw ParameterError("karlin_ratio: n must be >= 1");
  const double a = law.alpha();
  const double ell = std::exp(-a * std::log(law.normalizer()));
  const double target = a * std::tgamma(1.0 - a) * ell * std::pow(static_cast<double>(n), a);
  return expected_k_r(law, n, 1) / target;
}

}  // namespace missmass
