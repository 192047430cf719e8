#pragma once

// Exact two-locus sampling probabilities from Golding's recursion.
//
// The recursion is not strictly recursive: the A/B coalescence terms
// 2 a_i b_j q(a - e_i, b - e_j, c + e_ij) and the recombination terms
// rho c_ij q(a + e_i, b + e_j, c - e_ij) keep the degree a + b + 2c fixed.
// Reachable states are therefore grouped by degree and each degree is solved as
// one coupled linear system, lowest degree first.

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "twolocus/config.hpp"
#include "twolocus/numerics.hpp"
#include "twolocus/sparse_system.hpp"

namespace twolocus {

template <Scalar S>
struct Params {
  S theta_a;
  S theta_b;
  S rho;

  /// Throws ParameterError unless theta_a, theta_b > 0 and rho >= 0.
  void validate() const;
  /// Swaps the roles of the two loci.
  Params swapped() const { return {theta_b, theta_a, rho}; }
};

template <Scalar To>
Params<To> convert_params(const Params<Rational>& params) {
  return {from_rational<To>(params.theta_a), from_rational<To>(params.theta_b), from_rational<To>(params.rho)};
}

/// Which rate multiplies a recursion term.
enum class RateFactor { unit, theta_a, theta_b, rho };

struct GoldingTerm {
  RateFactor factor;
  long weight;
  TwoLocusConfig target;
};

struct GoldingNeighbors {
  std::vector<GoldingTerm> same_degree;
  std::vector<GoldingTerm> lower_degree;
};

/// Right-hand side terms of Golding's recursion with nonzero coefficient.
/// Terms that would need a negative entry are omitted; targets in which an
/// allele loses its last gamete have that allele removed. Targets are not
/// canonicalized.
GoldingNeighbors golding_neighbors(const TwoLocusConfig& config);

template <Scalar S>
S rate_coefficient(RateFactor factor, long weight, const Params<S>& params);

/// n(n-1) + theta_A (a+c) + theta_B (b+c) + rho c.
template <Scalar S>
S golding_diagonal(const TwoLocusConfig& config, const Params<S>& params);

/// q = 1 boundary: a single gamete typed at one locus only.
bool is_golding_boundary(const TwoLocusConfig& config);

/// States of one degree coupled by the recursion, with the assembled system
/// (matrix over `states` and the right-hand side from lower degrees).
template <Scalar S>
struct DegreeSystem {
  int degree = 0;
  std::vector<TwoLocusConfig> states;
  SparseSystem<S> system{0};
};

struct SolverLimits {
  std::size_t max_states = 1'000'000;
  int max_alleles = kDefaultCanonicalizationLimit;
};

/// Memoizing solver for one parameter set. Results are cached by canonical
/// configuration, so repeated queries share their closure. Not thread safe: use
/// one instance per worker.
template <Scalar S>
class GoldingSolver {
 public:
  explicit GoldingSolver(Params<S> params, SolverLimits limits = {});

  const Params<S>& params() const { return params_; }
  std::size_t cached_states() const { return cache_.size(); }

  /// Throws CapabilityError when the closure exceeds the state budget.
  S probability(const TwoLocusConfig& config);

  /// LHS - RHS of the recursion at `config`, every term taken from the solver.
  S residual(const TwoLocusConfig& config);

  /// Called with every assembled degree system just before it is solved.
  void set_system_observer(std::function<void(const DegreeSystem<S>&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  void solve_closure(const TwoLocusConfig& root);
  const S& cached(const TwoLocusConfig& canonical_state) const;

  Params<S> params_;
  SolverLimits limits_;
  std::unordered_map<TwoLocusConfig, S, ConfigHash> cache_;
  std::function<void(const DegreeSystem<S>&)> observer_;
};

/// One-shot exact probability.
template <Scalar S>
S exact_q(const TwoLocusConfig& config, const Params<S>& params, SolverLimits limits = {});

}  // namespace twolocus
