#pragma once

// Extended two-locus sample configurations (a, b, c): gametes typed only at
// locus A, only at locus B, and at both loci.

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace twolocus {

/// a has one entry per A-allele (K), b one per B-allele (L), and c is the K x L
/// matrix of fully typed gametes stored row-major. Every allele index must be
/// observed somewhere: a_i + c_i. >= 1 and b_j + c_.j >= 1.
struct TwoLocusConfig {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> c;

  TwoLocusConfig() = default;
  TwoLocusConfig(std::vector<int> a_counts, std::vector<int> b_counts, std::vector<int> c_row_major);
  static TwoLocusConfig from_matrix(std::vector<int> a_counts, std::vector<int> b_counts,
                                    const std::vector<std::vector<int>>& c_matrix);

  int num_a_alleles() const { return static_cast<int>(a.size()); }
  int num_b_alleles() const { return static_cast<int>(b.size()); }

  int& cell(int i, int j) { return c[static_cast<std::size_t>(i) * b.size() + j]; }
  int cell(int i, int j) const { return c[static_cast<std::size_t>(i) * b.size() + j]; }

  int a_total() const;
  int b_total() const;
  int c_total() const;
  int sample_size() const { return a_total() + b_total() + c_total(); }
  int degree() const { return a_total() + b_total() + 2 * c_total(); }

  std::vector<int> c_row_sums() const;
  std::vector<int> c_col_sums() const;

  /// a + c_A and b + c_B: the one-locus shadows of the whole sample.
  std::vector<int> a_marginal() const;
  std::vector<int> b_marginal() const;

  /// Locus swap: (b, a, c^T).
  TwoLocusConfig transposed() const;

  /// Deletes an A-allele (row) or B-allele (column) entirely.
  void remove_a_allele(int i);
  void remove_b_allele(int j);
  /// Appends a fresh allele with the given A-only (B-only) count and no typed
  /// gametes.
  void add_a_allele(int count);
  void add_b_allele(int count);

  friend auto operator<=>(const TwoLocusConfig&, const TwoLocusConfig&) = default;
  friend bool operator==(const TwoLocusConfig&, const TwoLocusConfig&) = default;
};

/// Throws ContractViolation on shape mismatch, negative entries or a globally
/// empty allele.
void validate(const TwoLocusConfig& config);
bool is_valid(const TwoLocusConfig& config);

struct ConfigHash {
  std::size_t operator()(const TwoLocusConfig& config) const noexcept;
};

/// Canonical representative of a configuration's orbit under relabeling of the
/// alleles at each locus, with the permutation that produced it:
/// canonical row r is original row row_order[r], likewise for columns.
struct CanonicalForm {
  TwoLocusConfig config;
  std::vector<int> row_order;
  std::vector<int> col_order;
};

inline constexpr int kDefaultCanonicalizationLimit = 8;

/// Lexicographically smallest relabeling, ordering keys as
/// (a, then the columns (b_j, c_0j, ..., c_Kj) in order). Throws
/// CapabilityError when K or L exceeds max_alleles.
CanonicalForm canonicalize(const TwoLocusConfig& config, int max_alleles = kDefaultCanonicalizationLimit);
TwoLocusConfig canonical(const TwoLocusConfig& config, int max_alleles = kDefaultCanonicalizationLimit);

/// {"a": [..], "b": [..], "c": [[..], ..]}. An empty or missing a (b) next to
/// a nonempty c is read as all zeros.
nlohmann::json to_json(const TwoLocusConfig& config);
std::string to_json_string(const TwoLocusConfig& config);
/// Throws ContractViolation on a wrong shape or an invalid configuration.
TwoLocusConfig config_from_json(const nlohmann::json& value);
/// Throws nlohmann::json::parse_error (with byte position) on malformed text.
TwoLocusConfig parse_config(const std::string& text);

struct EnumerationLimits {
  int max_a_alleles = 2;
  int max_b_alleles = 2;
  int max_typed = -1;  ///< cap on c; negative means unbounded
};

/// Every inequivalent configuration with 1 <= n <= n_max inside the limits,
/// each once, ordered by sample size and then by canonical form.
std::vector<TwoLocusConfig> enumerate_canonical_configs(int n_max, const EnumerationLimits& limits);

}  // namespace twolocus
