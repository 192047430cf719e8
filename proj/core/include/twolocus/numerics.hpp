#pragma once

// Scalar backends and combinatorial primitives.
//
// Every probability in the library is computed over one of two scalar types:
// an exact GMP rational (verification) or an IEEE double (table sweeps). The
// backend is picked per computation by instantiating the templates below with
// the matching type; `Backend` is the runtime tag used at API boundaries.

#include <gmpxx.h>

#include <concepts>
#include <span>
#include <string>
#include <string_view>

namespace twolocus {

using BigInt = mpz_class;
using Rational = mpq_class;

enum class Backend { rational, floating };

template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Rational>;

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

template <Scalar S>
S from_int(long value) {
  return S(value);
}

template <Scalar S>
S from_rational(const Rational& value) {
  if constexpr (std::same_as<S, double>) {
    return value.get_d();
  } else {
    return value;
  }
}

inline double to_double(double value) { return value; }
inline double to_double(const Rational& value) { return value.get_d(); }

inline double abs_value(double value) { return value < 0 ? -value : value; }
inline Rational abs_value(const Rational& value) { return abs(value); }

/// Exact fraction ("-3/4", "1") for rationals, shortest round-trip decimal for
/// doubles.
std::string to_string(const Rational& value);
std::string to_string(double value);

/// Parses "3", "-3/4", "0.25", "1e8" or "2.5e-3" into an exact rational.
/// Throws ParameterError on malformed input.
Rational parse_rational(std::string_view text);

/// x (x+1) ... (x+n-1); 1 when n == 0.
template <Scalar S>
S ascending_factorial(const S& x, int n);

BigInt factorial(int n);
BigInt binomial(int n, int k);

/// Unsigned Stirling numbers of the first kind. Zero for k > n or k < 0.
/// Backed by a triangular table that grows on demand and is shared across
/// threads.
BigInt stirling_first_unsigned(int n, int k);

/// total! / prod(parts_i!). Throws ContractViolation when the parts do not sum
/// to total or any part is negative.
BigInt multinomial(int total, std::span<const int> parts);

/// E[C(C-1)] for C ~ hypergeometric(population, successes, draws).
template <Scalar S>
S hypergeometric_factorial_moment(int population, int successes, int draws);

/// x(x-1)/2, zero for x in {0, 1}.
constexpr long choose2(long x) { return x * (x - 1) / 2; }

}  // namespace twolocus
