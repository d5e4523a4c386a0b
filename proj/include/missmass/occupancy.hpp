#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "missmass/errors.hpp"

namespace missmass {

// Observed atom identities X_1..X_n. Identities are positive integers; only
// their equality pattern matters for anything computed here.
class Sample {
 public:
  Sample() = default;

  explicit Sample(std::vector<std::uint64_t> indices) : indices_(std::move(indices)) {
    for (auto idx : indices_) {
      if (idx == 0) throw DataError("sample indices must be >= 1");
    }
  }

  Sample(std::initializer_list<std::uint64_t> indices)
      : Sample(std::vector<std::uint64_t>(indices)) {}

  const std::vector<std::uint64_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

 private:
  std::vector<std::uint64_t> indices_;
};

// Occupancy counts of a sample: Y_{n,j} (multiplicities), K_{n,r}
// (counts_by_level) and K_n (k_total). Both maps are sparse and ordered.
struct OccupancyProfile {
  std::uint64_t n = 0;
  std::map<std::uint64_t, std::uint64_t> counts_by_level;
  std::uint64_t k_total = 0;
  std::map<std::uint64_t, std::uint64_t> multiplicities;

  // K_{n,r}; zero for levels that do not occur.
  std::uint64_t k(std::uint64_t r) const {
    auto it = counts_by_level.find(r);
    return it == counts_by_level.end() ? 0 : it->second;
  }

  bool operator==(const OccupancyProfile&) const = default;
};

inline OccupancyProfile occupancy_profile(const Sample& sample) {
  OccupancyProfile profile;
  profile.n = sample.size();
  std::vector<std::uint64_t> sorted = sample.indices();
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::uint64_t multiplicity = j - i;
    profile.multiplicities.emplace(sorted[i], multiplicity);
    ++profile.counts_by_level[multiplicity];
    ++profile.k_total;
    i = j;
  }
  return profile;
}

// Good-Turing estimate of the missing mass, K_{n,1} / n.
inline double good_turing(const OccupancyProfile& profile) {
  if (profile.n == 0) {
    throw UndefinedEstimatorError("good_turing: undefined for an empty sample");
  }
  return static_cast<double>(profile.k(1)) / static_cast<double>(profile.n);
}

// Multiplicative loss |estimate / truth - 1|. A zero truth means the whole
// support was observed; that is reported, never mapped to infinity.
inline double mult_loss(double estimate, double truth) {
  if (!(truth > 0.0)) {
    throw DomainError("mult_loss: truth must be > 0 (missing mass vanished)");
  }
  if (!(estimate >= 0.0)) throw DomainError("mult_loss: estimate must be >= 0");
  return std::fabs(estimate / truth - 1.0);
}

}  // namespace missmass
