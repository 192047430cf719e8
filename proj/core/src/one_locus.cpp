#include "twolocus/one_locus.hpp"

#include <algorithm>
#include <functional>

#include "twolocus/errors.hpp"

namespace twolocus {

namespace {

template <Scalar S>
void require_positive(const S& theta) {
  if (!(theta > 0)) throw ParameterError("mutation rate theta must be positive");
}

}  // namespace

OneLocusConfig::OneLocusConfig(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw ContractViolation("one-locus configuration must be non-empty");
  for (int n : counts_) {
    if (n <= 0) throw ContractViolation("one-locus multiplicities must be positive");
    sample_size_ += n;
  }
  std::sort(counts_.begin(), counts_.end(), std::greater<>());
}

std::vector<int> OneLocusConfig::multiplicity_classes() const {
  std::vector<int> alpha(sample_size_ + 1, 0);
  for (int n : counts_) ++alpha[n];
  return alpha;
}

template <Scalar S>
S esf_ordered(const OneLocusConfig& config, const S& theta) {
  require_positive(theta);
  S value = from_int<S>(1);
  for (int n : config.counts()) {
    value *= from_rational<S>(Rational(factorial(n - 1)));
    value *= theta;
  }
  value /= ascending_factorial(theta, config.sample_size());
  return value;
}

BigInt orderings_count(const OneLocusConfig& config) {
  BigInt denominator = 1;
  for (int n : config.counts()) denominator *= factorial(n);
  for (int alpha : config.multiplicity_classes()) denominator *= factorial(alpha);
  return factorial(config.sample_size()) / denominator;
}

template <Scalar S>
S esf_unordered(const OneLocusConfig& config, const S& theta) {
  return S(esf_ordered(config, theta) * from_rational<S>(Rational(orderings_count(config))));
}

template <Scalar S>
S allele_count_pmf(int n, int k, const S& theta) {
  require_positive(theta);
  if (n < 0) throw ContractViolation("allele_count_pmf: negative sample size");
  if (n == 0) return from_int<S>(k == 0 ? 1 : 0);
  if (k < 1 || k > n) return from_int<S>(0);
  S value = from_rational<S>(Rational(stirling_first_unsigned(n, k)));
  for (int i = 0; i < k; ++i) value *= theta;
  value /= ascending_factorial(theta, n);
  return value;
}

template <Scalar S>
S esf_ordered_or_zero(std::span<const int> counts, const S& theta) {
  std::vector<int> present;
  present.reserve(counts.size());
  for (int n : counts) {
    if (n < 0) return from_int<S>(0);
    if (n > 0) present.push_back(n);
  }
  if (present.empty()) return from_int<S>(1);
  return esf_ordered(OneLocusConfig(std::move(present)), theta);
}

template <Scalar S>
S one_locus_recursion_residual(const OneLocusConfig& config, const S& theta) {
  const int n = config.sample_size();
  S lhs = from_int<S>(static_cast<long>(n)) * (from_int<S>(n - 1) + theta) * esf_ordered(config, theta);
  S rhs = from_int<S>(0);
  const auto& counts = config.counts();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::vector<int> reduced = counts;
    --reduced[i];
    S q_reduced = esf_ordered_or_zero<S>(reduced, theta);
    rhs += from_int<S>(static_cast<long>(counts[i]) * (counts[i] - 1)) * q_reduced;
    if (counts[i] == 1) rhs += theta * q_reduced;
  }
  return S(lhs - rhs);
}

#define TWOLOCUS_INSTANTIATE(S)                                                  \
  template S esf_ordered<S>(const OneLocusConfig&, const S&);                    \
  template S esf_unordered<S>(const OneLocusConfig&, const S&);                  \
  template S allele_count_pmf<S>(int, int, const S&);                            \
  template S one_locus_recursion_residual<S>(const OneLocusConfig&, const S&);   \
  template S esf_ordered_or_zero<S>(std::span<const int>, const S&);

TWOLOCUS_INSTANTIATE(double)
TWOLOCUS_INSTANTIATE(Rational)

#undef TWOLOCUS_INSTANTIATE

}  // namespace twolocus
