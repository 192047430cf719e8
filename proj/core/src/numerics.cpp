#include "twolocus/numerics.hpp"

#include <array>
#include <charconv>
#include <mutex>
#include <numeric>
#include <vector>

#include "twolocus/errors.hpp"

namespace twolocus {

std::string_view to_string(Backend backend) {
  return backend == Backend::rational ? "rational" : "float";
}

Backend parse_backend(std::string_view name) {
  if (name == "rational" || name == "exact") return Backend::rational;
  if (name == "float" || name == "double") return Backend::floating;
  throw ParameterError("unknown backend '" + std::string(name) + "'");
}

std::string to_string(const Rational& value) { return value.get_str(); }

std::string to_string(double value) {
  std::array<char, 64> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer.data(), end);
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
  }
  return true;
}

BigInt pow10(unsigned long exponent) {
  BigInt result;
  mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
  return result;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Rational { throw ParameterError("not a number: '" + original + "'"); };

  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational numerator = parse_rational(text.substr(0, slash));
    Rational denominator = parse_rational(text.substr(slash + 1));
    if (denominator == 0) throw ParameterError("zero denominator in '" + original + "'");
    return Rational(numerator / denominator);
  }

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6) return fail();
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }

  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view fraction = text.substr(dot + 1);
    if (whole.empty() && fraction.empty()) return fail();
    if ((!whole.empty() && !all_digits(whole)) || (!fraction.empty() && !all_digits(fraction))) return fail();
    digits = std::string(whole) + std::string(fraction);
    exponent -= static_cast<long>(fraction.size());
  } else {
    if (!all_digits(text)) return fail();
    digits = std::string(text);
  }

  Rational value{BigInt(digits, 10)};
  if (exponent > 0) value *= pow10(static_cast<unsigned long>(exponent));
  if (exponent < 0) value /= pow10(static_cast<unsigned long>(-exponent));
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

template <Scalar S>
S ascending_factorial(const S& x, int n) {
  if (n < 0) throw ContractViolation("ascending_factorial: negative length");
  S result = from_int<S>(1);
  for (int i = 0; i < n; ++i) result *= x + from_int<S>(i);
  return result;
}

BigInt factorial(int n) {
  if (n < 0) throw ContractViolation("factorial of a negative number");
  BigInt result;
  mpz_fac_ui(result.get_mpz_t(), static_cast<unsigned long>(n));
  return result;
}

BigInt binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  BigInt result;
  mpz_bin_uiui(result.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return result;
}

namespace {

class StirlingTable {
 public:
  BigInt get(int n, int k) {
    std::scoped_lock lock(mutex_);
    while (static_cast<int>(rows_.size()) <= n) grow();
    return rows_[n][k];
  }

 private:
  void grow() {
    const int n = static_cast<int>(rows_.size());
    std::vector<BigInt> row(n + 1, BigInt(0));
    if (n == 0) {
      row[0] = 1;
    } else {
      const auto& prev = rows_.back();
      for (int k = 1; k <= n; ++k) {
        BigInt value = prev.size() > static_cast<std::size_t>(k - 1) ? prev[k - 1] : BigInt(0);
        if (k <= n - 1) value += BigInt(n - 1) * prev[k];
        row[k] = value;
      }
    }
    rows_.push_back(std::move(row));
  }

  std::mutex mutex_;
  std::vector<std::vector<BigInt>> rows_;
};

StirlingTable& stirling_table() {
  static StirlingTable table;
  return table;
}

}  // namespace

BigInt stirling_first_unsigned(int n, int k) {
  if (n < 0) throw ContractViolation("stirling_first_unsigned: negative n");
  if (k < 0 || k > n) return 0;
  return stirling_table().get(n, k);
}

BigInt multinomial(int total, std::span<const int> parts) {
  long sum = 0;
  for (int part : parts) {
    if (part < 0) throw ContractViolation("multinomial: negative part");
    sum += part;
  }
  if (sum != total) throw ContractViolation("multinomial: parts do not sum to total");
  BigInt result = factorial(total);
  for (int part : parts) result /= factorial(part);
  return result;
}

template <Scalar S>
S hypergeometric_factorial_moment(int population, int successes, int draws) {
  if (successes < 0 || draws < 0 || successes > population || draws > population) {
    throw ContractViolation("hypergeometric_factorial_moment: counts out of range");
  }
  if (population <= 1) return from_int<S>(0);
  S numerator = from_int<S>(static_cast<long>(draws) * (draws - 1)) *
                from_int<S>(static_cast<long>(successes) * (successes - 1));
  S denominator = from_int<S>(static_cast<long>(population) * (population - 1));
  return S(numerator / denominator);
}

template double ascending_factorial<double>(const double&, int);
template Rational ascending_factorial<Rational>(const Rational&, int);
template double hypergeometric_factorial_moment<double>(int, int, int);
template Rational hypergeometric_factorial_moment<Rational>(int, int, int);

}  // namespace twolocus
