#pragma once

// Joint distribution of the numbers of alleles K and L observed at the two
// loci of a sample with a A-only, b B-only and c fully typed gametes.
//
//   p(a, b, c; k, l) = P(K_{a,b,c} = k, L_{a,b,c} = l)
//
// solved exactly from its coalescent recursion, and its large-rho expansion
// p0 + p1 / rho + O(rho^-2).

#include <compare>
#include <cstddef>
#include <string>
#include <unordered_map>

#include "twolocus/asymptotic.hpp"
#include "twolocus/numerics.hpp"
#include "twolocus/two_locus.hpp"

namespace twolocus {

struct CountConfig {
  int a = 0;
  int b = 0;
  int c = 0;
  int k = 0;
  int l = 0;

  int sample_size() const { return a + b + c; }
  int degree() const { return a + b + 2 * c; }
  friend auto operator<=>(const CountConfig&, const CountConfig&) = default;
};

std::string to_string(const CountConfig& query);

/// True when the probability vanishes by convention: a negative field, an
/// empty sample, k = l = 0, or an allele count the sample cannot produce.
bool is_structural_zero(const CountConfig& query);

/// P(K_n = k) at locus A (resp. L_n = l at locus B) with that locus' theta.
template <Scalar S>
S count_pmf_a(int n, int k, const Params<S>& params);
template <Scalar S>
S count_pmf_b(int n, int l, const Params<S>& params);

/// Memoizing exact solver, one per parameter set. Not thread safe.
template <Scalar S>
class CountSolver {
 public:
  explicit CountSolver(Params<S> params, SolverLimits limits = {});

  const Params<S>& params() const { return params_; }
  std::size_t cached_states() const { return cache_.size(); }

  /// Throws ContractViolation for an empty sample and CapabilityError when
  /// the closure exceeds the state budget.
  S probability(const CountConfig& query);

  /// LHS - RHS of the recursion at `query`.
  S residual(const CountConfig& query);

 private:
  struct Hash {
    std::size_t operator()(const CountConfig& q) const noexcept;
  };
  void solve_closure(const CountConfig& root);

  Params<S> params_;
  SolverLimits limits_;
  std::unordered_map<CountConfig, S, Hash> cache_;
};

template <Scalar S>
S exact_count_pmf(const CountConfig& query, const Params<S>& params, SolverLimits limits = {});

/// p^A(a+c; k) p^B(b+c; l).
template <Scalar S>
S p0(const CountConfig& query, const Params<S>& params);

/// c(c-1)/2 [p^A(a+c; k) - p^A(a+c-1; k)] [p^B(b+c; l) - p^B(b+c-1; l)].
template <Scalar S>
S p1(const CountConfig& query, const Params<S>& params);

/// p0 (+ p1 / rho). Orders above 1 are not available; order 1 needs rho > 0.
template <Scalar S>
S count_pmf_asymptotic(const CountConfig& query, const Params<S>& params, ExpansionOrder order);

}  // namespace twolocus
