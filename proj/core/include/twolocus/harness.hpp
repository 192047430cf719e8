#pragma once

// Verification against the exact solvers.
//
// Under the rational backend q(rho) is known exactly at any finite rho, so the
// coefficients of its expansion in 1/rho can be recovered by polynomial
// (Richardson) extrapolation in h = 1/rho over a schedule of large rho values:
//
//   q0_hat = lim q(rho)
//   q1_hat = lim rho (q - q0)
//   q2_hat = lim rho^2 (q - q0 - q1 / rho)
//
// with the closed forms used for the lower orders.

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twolocus/allele_counts.hpp"
#include "twolocus/asymptotic.hpp"
#include "twolocus/config.hpp"
#include "twolocus/numerics.hpp"
#include "twolocus/two_locus.hpp"

namespace twolocus {

/// 10^4, 10^5, 10^6, 10^7.
std::vector<Rational> default_rho_schedule();

/// Value at h = 0 of the interpolating polynomial through (h_k, y_k) (Neville).
Rational richardson_extrapolate(std::span<const Rational> h, std::span<const Rational> y);

struct ResidualDecay {
  int order;
  Rational rho;
  Rational scaled;  ///< rho^(order+1) |q(rho) - truncation_order(rho)|
};

struct SeriesEstimate {
  std::vector<Rational> rho_schedule;
  std::vector<Rational> exact_values;
  /// Extracted coefficients, one per order.
  std::vector<Rational> coefficients;
  /// scaled[r][k]: the sequence whose limit is coefficient r, at rho_schedule[k].
  std::vector<std::vector<Rational>> scaled;
  /// Successive differences of scaled[r].
  std::vector<std::vector<Rational>> differences;
  std::vector<ResidualDecay> residual_decay;
  /// Points appended past the requested schedule before the tail settled.
  int extensions = 0;
  bool converged = true;
  std::string diagnostic;
};

using ExactFunction = std::function<Rational(const Rational& rho)>;

/// closed_forms[r] is the closed-form coefficient of order r; entries below r
/// are subtracted when extracting order r, and all of them feed the residual
/// diagnostics. One coefficient is extracted per closed form. The schedule must
/// be strictly increasing, positive and of length >= 3. Convergence requires
/// the last step of each difference sequence to shrink at least half as fast
/// as the schedule spacing in h predicts. Failing that, up to `max_extensions`
/// further points are appended at the last spacing ratio and the window slides
/// forward, keeping its length; `rho_schedule` in the result is the window
/// actually used. If the tail never settles `converged` is false and
/// `diagnostic` holds the per-rho table.
SeriesEstimate extract_series(const ExactFunction& exact, std::span<const Rational> closed_forms,
                              std::span<const Rational> rho_schedule, int max_extensions = 0);

/// Two-locus series for one configuration, orders 0..2.
SeriesEstimate extract_series(const TwoLocusConfig& config, const Params<Rational>& thetas,
                              std::span<const Rational> rho_schedule, SolverLimits limits = {},
                              int max_extensions = 0);

/// True when rho^(r+1) |residual_r| never grows by more than `factor` between
/// successive schedule points, for every order present.
bool residual_law_holds(const std::vector<ResidualDecay>& decay, double factor = 2.0);

/// Shares one exact solver per rho across many queries; solvers for extension
/// points are created on first use.
class SeriesExtractor {
 public:
  SeriesExtractor(Params<Rational> thetas, std::vector<Rational> rho_schedule, SolverLimits limits = {},
                  int max_extensions = 0);

  const std::vector<Rational>& rho_schedule() const { return schedule_; }
  const Params<Rational>& thetas() const { return thetas_; }

  /// Orders 0..2 against q0, q1 and the given second-order closed form
  /// (q2_ab0 + sigma when omitted).
  SeriesEstimate two_locus(const TwoLocusConfig& config, std::optional<Rational> q2_closed = std::nullopt);
  /// Orders 0..1 against p0, p1.
  SeriesEstimate counts(const CountConfig& query);

  SecondOrderSolver<Rational>& second_order() { return second_order_; }

 private:
  GoldingSolver<Rational>& golding_at(const Rational& rho);
  CountSolver<Rational>& counts_at(const Rational& rho);

  Params<Rational> thetas_;
  std::vector<Rational> schedule_;
  SolverLimits limits_;
  int max_extensions_;
  std::map<Rational, GoldingSolver<Rational>> golding_;
  std::map<Rational, CountSolver<Rational>> counts_;
  SecondOrderSolver<Rational> second_order_;
};

struct Tolerances {
  double q0 = 1e-6;
  double q1 = 1e-6;
  double q2 = 1e-4;
  double p0 = 1e-6;
  double p1 = 1e-6;
};

/// |estimate - closed| / |closed|, or |estimate| / scale when closed == 0
/// (scale is the order-0 value, so vanishing coefficients are judged on the
/// scale of the probability itself).
double coefficient_error(const Rational& estimate, const Rational& closed, const Rational& scale);

struct VerifyOptions {
  int n_max = 4;
  EnumerationLimits limits{};
  Params<Rational> thetas{Rational(1), Rational(1), Rational(0)};
  std::vector<Rational> rho_schedule = default_rho_schedule();
  Tolerances tolerances{};
  int max_order = 2;
  /// Allele-count sweep over a + b + c <= counts_n_max; negative disables it.
  int counts_n_max = -1;
  /// Extra configurations checked after the enumerated family.
  std::vector<TwoLocusConfig> extra_configs;
  SolverLimits solver_limits{};
  /// Extra rho points allowed per series whose tail has not settled.
  int max_extensions = 2;
  /// Test hook: may modify the sigma breakdown before it is summed.
  std::function<void(const TwoLocusConfig&, SigmaBreakdown<Rational>&)> sigma_hook;
};

struct ConfigVerdict {
  TwoLocusConfig config;
  bool passed = true;
  std::vector<Rational> estimates;
  std::vector<Rational> closed_forms;
  std::vector<double> errors;
  /// Filled for configurations that fail at order 2.
  std::optional<SigmaBreakdown<Rational>> sigma_breakdown;
  std::optional<Rational> unexplained;  ///< q2_hat - q2_ab0 - sigma
  int extensions = 0;
  std::string diagnostic;
};

struct CountVerdict {
  CountConfig query;
  bool passed = true;
  std::array<Rational, 2> estimates;
  std::array<Rational, 2> closed_forms;
  std::array<double, 2> errors{};
  int extensions = 0;
  std::string diagnostic;
};

struct VerifyReport {
  std::vector<ConfigVerdict> configs;
  std::vector<CountVerdict> counts;
  std::array<double, 3> worst_error{};
  std::array<double, 2> worst_count_error{};
  std::size_t failures = 0;

  bool passed() const { return failures == 0; }
};

VerifyReport verify_sweep(const VerifyOptions& options);

/// One line per failing item plus a summary; every item when `verbose`.
void write_report(std::ostream& out, const VerifyReport& report, bool verbose = false);

}  // namespace twolocus
