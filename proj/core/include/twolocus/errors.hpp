#pragma once

#include <stdexcept>
#include <string>

namespace twolocus {

/// A rate or argument outside its admissible range (theta <= 0, rho = 0 with a
/// positive expansion order, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is well formed but exceeds a configured resource limit
/// (state budget, canonicalization limit, enumeration budget).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (mismatched multinomial parts,
/// malformed configuration shape).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace twolocus
