#pragma once

// Lookup tables of two-locus sampling probabilities over a configuration
// family and a grid of (theta_A, theta_B, rho).

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "twolocus/config.hpp"
#include "twolocus/numerics.hpp"

namespace twolocus {

enum class TableMethod { exact, asymptotic0, asymptotic1, asymptotic2 };
enum class TableFormat { csv, json };

std::string_view to_string(TableMethod method);
TableMethod parse_table_method(std::string_view name);
std::string_view to_string(TableFormat format);
TableFormat parse_table_format(std::string_view name);

struct TableSpec {
  /// Enumerated family; n_max = 0 leaves only the explicit configurations.
  int n_max = 0;
  EnumerationLimits limits{};
  std::vector<TwoLocusConfig> configs;
  std::vector<Rational> theta_a;
  std::vector<Rational> theta_b;
  std::vector<Rational> rho;
  TableMethod method = TableMethod::exact;
  TableFormat format = TableFormat::csv;
  Backend backend = Backend::floating;
  std::size_t max_states = 1'000'000;

  /// Throws ParameterError on empty grids, nonpositive theta or negative rho.
  void validate() const;
};

/// Keys: n_max, max_a_alleles, max_b_alleles, max_typed, configs, theta_a,
/// theta_b, rho, method, format, backend, max_states. Grid entries may be
/// numbers or strings such as "1/2". Unknown keys are rejected.
TableSpec table_spec_from_json(const nlohmann::json& value);
nlohmann::json to_json(const TableSpec& spec);

struct TableRow {
  TwoLocusConfig config;
  Rational theta_a;
  Rational theta_b;
  Rational rho;
  TableMethod method = TableMethod::exact;
  /// Formatted scalars (exact fractions under the rational backend); empty
  /// when not applicable or when the row failed.
  std::string value;
  std::string q0;
  std::string q1_over_rho;
  std::string q2_over_rho2;
  std::string error;
};

/// Canonical configurations (enumerated family first, then the explicit ones,
/// duplicates dropped), each crossed with theta_a x theta_b x rho in that
/// nesting order. Solver failures land in the row's error field.
std::vector<TableRow> generate_table(const TableSpec& spec);

inline constexpr std::string_view kTableCsvHeader =
    "config,theta_a,theta_b,rho,method,value,q0,q1_over_rho,q2_over_rho2,error";

void write_table(std::ostream& out, const std::vector<TableRow>& rows, TableFormat format);

}  // namespace twolocus
