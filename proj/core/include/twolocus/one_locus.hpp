#pragma once

// Ewens sampling formula for a single infinite-alleles locus.

#include <span>
#include <vector>

#include "twolocus/numerics.hpp"

namespace twolocus {

/// Allele multiplicities (n_1, ..., n_K) of a one-locus sample. Stored as a
/// multiset: counts are strictly positive and kept sorted in descending order.
class OneLocusConfig {
 public:
  /// Drops nothing: zero or negative counts and an empty sample are rejected
  /// with ContractViolation.
  explicit OneLocusConfig(std::vector<int> counts);

  const std::vector<int>& counts() const { return counts_; }
  int sample_size() const { return sample_size_; }
  int allele_count() const { return static_cast<int>(counts_.size()); }

  /// alpha_i = number of alleles observed exactly i times, for i = 1..n
  /// (index 0 unused).
  std::vector<int> multiplicity_classes() const;

  friend bool operator==(const OneLocusConfig&, const OneLocusConfig&) = default;

 private:
  std::vector<int> counts_;
  int sample_size_ = 0;
};

/// Probability of one particular ordered sample with these multiplicities:
/// prod (n_i - 1)! theta^K / (theta)_n.
template <Scalar S>
S esf_ordered(const OneLocusConfig& config, const S& theta);

/// Probability of any sample with these multiplicities (the classical ESF).
template <Scalar S>
S esf_unordered(const OneLocusConfig& config, const S& theta);

/// Number of orderings n! / (prod n_i! prod alpha_i!).
BigInt orderings_count(const OneLocusConfig& config);

/// P(K_n = k) = s(n,k) theta^k / (theta)_n; zero for k outside [1, n]. n = 0
/// is accepted as the empty sample (mass 1 at k = 0).
template <Scalar S>
S allele_count_pmf(int n, int k, const S& theta);

/// LHS - RHS of the one-locus coalescent recursion evaluated with esf_ordered.
/// Exactly zero under the rational backend.
template <Scalar S>
S one_locus_recursion_residual(const OneLocusConfig& config, const S& theta);

/// esf_ordered over a raw count vector with the recursion conventions: zero
/// entries are absent alleles (dropped), any negative entry gives 0, and the
/// empty sample has probability 1. Used for the marginal shorthand of the
/// two-locus expansions.
template <Scalar S>
S esf_ordered_or_zero(std::span<const int> counts, const S& theta);

}  // namespace twolocus
