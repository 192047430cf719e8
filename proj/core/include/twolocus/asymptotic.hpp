#pragma once

// Large-rho expansion of the two-locus sampling probability,
//
//   q(a, b, c) = q0 + q1 / rho + q2 / rho^2 + O(rho^-3),
//
// with q0 and q1 in closed form, and q2 split into a strictly recursive part
// q2(a + c_A, b + c_B, 0) and the closed-form remainder sigma(a, b, c). Every
// term is expressed through one-locus ordered ESF values of the marginal
// configurations a + c_A and b + c_B with one or two gametes removed.

#include <array>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "twolocus/config.hpp"
#include "twolocus/numerics.hpp"
#include "twolocus/two_locus.hpp"

namespace twolocus {

enum class ExpansionOrder : int { zeroth = 0, first = 1, second = 2 };

/// Throws ParameterError for anything outside {0, 1, 2}.
ExpansionOrder expansion_order(int order);

/// Q^A = q^A(a + c_A), Q^A_i = q^A(a + c_A - e_i), Q^A_ik = q^A(a + c_A - e_i - e_k),
/// and the B-locus mirrors. A deletion that empties an allele evaluates the
/// reduced configuration; one that would go negative gives 0.
template <Scalar S>
class MarginalProbabilities {
 public:
  MarginalProbabilities(const TwoLocusConfig& config, const Params<S>& params);

  const S& a() const { return qa_; }
  const S& a(int i) const { return qa_i_[i]; }
  const S& a(int i, int k) const { return qa_ik_[static_cast<std::size_t>(i) * rows_ + k]; }
  const S& b() const { return qb_; }
  const S& b(int j) const { return qb_j_[j]; }
  const S& b(int j, int l) const { return qb_jl_[static_cast<std::size_t>(j) * cols_ + l]; }

 private:
  int rows_;
  int cols_;
  S qa_;
  S qb_;
  std::vector<S> qa_i_;
  std::vector<S> qb_j_;
  std::vector<S> qa_ik_;
  std::vector<S> qb_jl_;
};

template <Scalar S>
S q0(const TwoLocusConfig& config, const Params<S>& params);

template <Scalar S>
S q1(const TwoLocusConfig& config, const Params<S>& params);

inline constexpr std::size_t kSigmaTermCount = 17;

/// The closed-form remainder of q2 as its separately evaluated term groups, in
/// display order. Groups that do not apply to a configuration are zero.
template <Scalar S>
struct SigmaBreakdown {
  std::array<S, kSigmaTermCount> terms;
  S total() const;
};

std::string_view sigma_term_name(std::size_t index);

/// The theta-dependent corrections in the Q_ii^A and Q_jj^B groups switch on
/// when deleting two gametes empties the allele, i.e. a_i + c_i. == 2
/// (resp. b_j + c_.j == 2). `as_printed` keys them on c_i. == 2 alone, the
/// form in which the expression is usually quoted; it disagrees with the exact
/// series whenever a_i > 0 and c_i. == 2, and is kept only for comparison.
enum class SigmaVariant { corrected, as_printed };

template <Scalar S>
SigmaBreakdown<S> sigma_terms(const TwoLocusConfig& config, const Params<S>& params,
                              SigmaVariant variant = SigmaVariant::corrected);

template <Scalar S>
S sigma(const TwoLocusConfig& config, const Params<S>& params, SigmaVariant variant = SigmaVariant::corrected);

/// q2(a, b, 0) from its strict recursion, memoized over (sorted a, sorted b).
/// One instance per parameter set; not thread safe.
template <Scalar S>
class SecondOrderSolver {
 public:
  explicit SecondOrderSolver(Params<S> params);

  S value(std::vector<int> a_counts, std::vector<int> b_counts);
  const Params<S>& params() const { return params_; }

 private:
  struct Key {
    std::vector<int> a;
    std::vector<int> b;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  Params<S> params_;
  std::unordered_map<Key, S, KeyHash> memo_;
};

template <Scalar S>
S q2_ab0(std::vector<int> a_counts, std::vector<int> b_counts, const Params<S>& params);

/// q2(a + c_A, b + c_B, 0) + sigma(a, b, c).
template <Scalar S>
S q2(const TwoLocusConfig& config, SecondOrderSolver<S>& solver);
template <Scalar S>
S q2(const TwoLocusConfig& config, const Params<S>& params);

/// q0 + q1/rho + q2/rho^2 truncated after `order`. Order 0 ignores rho (it is
/// also the rho = infinity value); higher orders need rho > 0.
template <Scalar S>
S q_asymptotic(const TwoLocusConfig& config, const Params<S>& params, ExpansionOrder order);

/// q1 by brute-force enumeration of every hypergeometric subsample of the
/// typed gametes at every size. Independent of the closed form; exponential in
/// c, so refused (CapabilityError) for c > max_typed.
template <Scalar S>
S q1_subsampling_oracle(const TwoLocusConfig& config, const Params<S>& params, int max_typed = 8);

}  // namespace twolocus
