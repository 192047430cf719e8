#include "twolocus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "twolocus/errors.hpp"

namespace twolocus {

std::vector<Rational> default_rho_schedule() {
  return {Rational(10000), Rational(100000), Rational(1000000), Rational(10000000)};
}

Rational richardson_extrapolate(std::span<const Rational> h, std::span<const Rational> y) {
  if (h.size() != y.size() || h.empty()) throw ContractViolation("richardson_extrapolate: size mismatch");
  std::vector<Rational> p(y.begin(), y.end());
  for (std::size_t m = 1; m < p.size(); ++m) {
    for (std::size_t i = 0; i + m < p.size(); ++i) {
      p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
    }
  }
  return p[0];
}

namespace {

void check_schedule(std::span<const Rational> schedule) {
  if (schedule.size() < 3) throw ParameterError("rho schedule needs at least 3 points");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] <= 0) throw ParameterError("rho schedule must be positive");
    if (k > 0 && schedule[k] <= schedule[k - 1]) throw ParameterError("rho schedule must be strictly increasing");
  }
}

Rational power(const Rational& x, int n) {
  Rational out = 1;
  for (int i = 0; i < n; ++i) out *= x;
  return out;
}

std::string fmt(double v) { return to_string(v); }

}  // namespace

namespace {

SeriesEstimate analyse_window(std::span<const Rational> rho_schedule, std::span<const Rational> values,
                              std::span<const Rational> closed_forms) {
  const std::size_t points = rho_schedule.size();
  const std::size_t orders = closed_forms.size();

  SeriesEstimate out;
  out.rho_schedule.assign(rho_schedule.begin(), rho_schedule.end());
  out.exact_values.assign(values.begin(), values.end());
  std::vector<Rational> h(points);
  for (std::size_t k = 0; k < points; ++k) h[k] = 1 / rho_schedule[k];

  out.scaled.assign(orders, std::vector<Rational>(points));
  out.differences.assign(orders, {});
  for (std::size_t r = 0; r < orders; ++r) {
    for (std::size_t k = 0; k < points; ++k) {
      Rational partial = out.exact_values[k];
      for (std::size_t s = 0; s < r; ++s) partial -= closed_forms[s] * power(h[k], static_cast<int>(s));
      out.scaled[r][k] = partial * power(rho_schedule[k], static_cast<int>(r));
    }
    out.coefficients.push_back(richardson_extrapolate(h, out.scaled[r]));
    for (std::size_t k = 0; k + 1 < points; ++k) {
      out.differences[r].push_back(out.scaled[r][k + 1] - out.scaled[r][k]);
    }
    // Judged at the tail: the early points of slowly settling series
    // legitimately decay more slowly than the spacing predicts.
    const auto& d = out.differences[r];
    const std::size_t k = d.size() - 2;
    const Rational expected = (h[k + 2] - h[k + 1]) / (h[k + 1] - h[k]);
    if (abs(d[k + 1]) > 2 * abs(expected) * abs(d[k])) out.converged = false;
  }

  for (std::size_t r = 0; r < orders; ++r) {
    for (std::size_t k = 0; k < points; ++k) {
      Rational residual = out.exact_values[k];
      for (std::size_t s = 0; s <= r; ++s) residual -= closed_forms[s] * power(h[k], static_cast<int>(s));
      out.residual_decay.push_back(
          {static_cast<int>(r), rho_schedule[k], abs(residual) * power(rho_schedule[k], static_cast<int>(r) + 1)});
    }
  }

  if (!out.converged) {
    std::ostringstream table;
    table << "non-convergent series; per-rho table (rho, exact, scaled estimates by order):";
    for (std::size_t k = 0; k < points; ++k) {
      table << "\n  " << to_string(rho_schedule[k]) << "  " << fmt(out.exact_values[k].get_d());
      for (std::size_t r = 0; r < orders; ++r) table << "  " << fmt(out.scaled[r][k].get_d());
    }
    table << "\n  successive difference ratios by order (expected ";
    table << fmt(Rational((h[points - 1] - h[points - 2]) / (h[points - 2] - h[points - 3])).get_d()) << " at the tail):";
    for (std::size_t r = 0; r < orders; ++r) {
      table << "\n  " << r << ":";
      const auto& d = out.differences[r];
      for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        table << "  " << (d[k] == 0 ? std::string("-") : fmt(Rational(d[k + 1] / d[k]).get_d()));
      }
    }
    out.diagnostic = table.str();
  }
  return out;
}

}  // namespace

SeriesEstimate extract_series(const ExactFunction& exact, std::span<const Rational> closed_forms,
                              std::span<const Rational> rho_schedule, int max_extensions) {
  check_schedule(rho_schedule);
  if (closed_forms.empty()) throw ContractViolation("extract_series: no orders requested");
  if (max_extensions < 0) throw ParameterError("max_extensions must be nonnegative");
  std::vector<Rational> rhos(rho_schedule.begin(), rho_schedule.end());
  std::vector<Rational> values;
  for (const auto& rho : rhos) values.push_back(exact(rho));
  const std::size_t window = rhos.size();
  for (int extension = 0;; ++extension) {
    const std::size_t first = rhos.size() - window;
    SeriesEstimate out = analyse_window(std::span(rhos).subspan(first), std::span(values).subspan(first), closed_forms);
    out.extensions = extension;
    if (out.converged || extension == max_extensions) {
      if (!out.converged && extension > 0) {
        out.diagnostic += "\n  (after " + std::to_string(extension) + " schedule extension(s))";
      }
      return out;
    }
    const Rational next = rhos.back() * rhos.back() / rhos[rhos.size() - 2];
    rhos.push_back(next);
    values.push_back(exact(next));
  }
}

bool residual_law_holds(const std::vector<ResidualDecay>& decay, double factor) {
  for (std::size_t i = 0; i + 1 < decay.size(); ++i) {
    const auto& x = decay[i];
    const auto& y = decay[i + 1];
    if (x.order != y.order) continue;
    if (y.scaled > x.scaled * Rational(factor)) return false;
  }
  return true;
}

SeriesExtractor::SeriesExtractor(Params<Rational> thetas, std::vector<Rational> rho_schedule, SolverLimits limits,
                                 int max_extensions)
    : thetas_(std::move(thetas)),
      schedule_(std::move(rho_schedule)),
      limits_(limits),
      max_extensions_(max_extensions),
      second_order_(thetas_) {
  check_schedule(schedule_);
  if (max_extensions_ < 0) throw ParameterError("max_extensions must be nonnegative");
  thetas_.rho = 0;
  thetas_.validate();
}

GoldingSolver<Rational>& SeriesExtractor::golding_at(const Rational& rho) {
  auto it = golding_.find(rho);
  if (it == golding_.end()) {
    it = golding_.emplace(rho, GoldingSolver<Rational>({thetas_.theta_a, thetas_.theta_b, rho}, limits_)).first;
  }
  return it->second;
}

CountSolver<Rational>& SeriesExtractor::counts_at(const Rational& rho) {
  auto it = counts_.find(rho);
  if (it == counts_.end()) {
    it = counts_.emplace(rho, CountSolver<Rational>({thetas_.theta_a, thetas_.theta_b, rho}, limits_)).first;
  }
  return it->second;
}

SeriesEstimate SeriesExtractor::two_locus(const TwoLocusConfig& config, std::optional<Rational> q2_closed) {
  std::array<Rational, 3> closed{q0(config, thetas_), q1(config, thetas_),
                                 q2_closed ? *q2_closed : q2(config, second_order_)};
  auto exact = [&](const Rational& rho) { return golding_at(rho).probability(config); };
  return extract_series(exact, closed, schedule_, max_extensions_);
}

SeriesEstimate SeriesExtractor::counts(const CountConfig& query) {
  std::array<Rational, 2> closed{p0(query, thetas_), p1(query, thetas_)};
  auto exact = [&](const Rational& rho) { return counts_at(rho).probability(query); };
  return extract_series(exact, closed, schedule_, max_extensions_);
}

SeriesEstimate extract_series(const TwoLocusConfig& config, const Params<Rational>& thetas,
                              std::span<const Rational> rho_schedule, SolverLimits limits, int max_extensions) {
  SeriesExtractor extractor(thetas, std::vector<Rational>(rho_schedule.begin(), rho_schedule.end()), limits,
                            max_extensions);
  return extractor.two_locus(config);
}

double coefficient_error(const Rational& estimate, const Rational& closed, const Rational& scale) {
  const Rational diff = abs(estimate - closed);
  if (closed != 0) return Rational(diff / abs(closed)).get_d();
  if (diff == 0) return 0.0;
  if (scale == 0) return INFINITY;
  return Rational(diff / abs(scale)).get_d();
}

VerifyReport verify_sweep(const VerifyOptions& options) {
  if (options.max_order < 0 || options.max_order > 2) throw ParameterError("max_order must be 0, 1 or 2");
  VerifyReport report;
  SeriesExtractor extractor(options.thetas, options.rho_schedule, options.solver_limits, options.max_extensions);
  const std::array<double, 3> tol{options.tolerances.q0, options.tolerances.q1, options.tolerances.q2};

  std::vector<TwoLocusConfig> configs;
  if (options.n_max >= 1) configs = enumerate_canonical_configs(options.n_max, options.limits);
  configs.insert(configs.end(), options.extra_configs.begin(), options.extra_configs.end());

  for (const auto& config : configs) {
    ConfigVerdict verdict;
    verdict.config = config;
    std::optional<SigmaBreakdown<Rational>> breakdown;
    std::optional<Rational> q2_closed;
    if (options.max_order >= 2) {
      breakdown = sigma_terms(config, extractor.thetas());
      if (options.sigma_hook) options.sigma_hook(config, *breakdown);
      q2_closed = extractor.second_order().value(config.a_marginal(), config.b_marginal()) + breakdown->total();
    }
    const SeriesEstimate series = extractor.two_locus(config, q2_closed);
    const std::size_t orders = static_cast<std::size_t>(options.max_order) + 1;
    const std::array<Rational, 3> closed{q0(config, extractor.thetas()), q1(config, extractor.thetas()),
                                         q2_closed.value_or(Rational(0))};
    for (std::size_t r = 0; r < orders; ++r) {
      verdict.estimates.push_back(series.coefficients[r]);
      verdict.closed_forms.push_back(closed[r]);
      const double err = coefficient_error(series.coefficients[r], closed[r], closed[0]);
      verdict.errors.push_back(err);
      report.worst_error[r] = std::max(report.worst_error[r], err);
      if (!(err <= tol[r])) {
        verdict.passed = false;
        if (r == 2) {
          verdict.sigma_breakdown = breakdown;
          verdict.unexplained = series.coefficients[2] - closed[2];
        }
      }
    }
    verdict.extensions = series.extensions;
    if (!series.converged) {
      verdict.passed = false;
      verdict.diagnostic = series.diagnostic;
    }
    if (!verdict.passed) ++report.failures;
    report.configs.push_back(std::move(verdict));
  }

  const std::array<double, 2> ctol{options.tolerances.p0, options.tolerances.p1};
  for (int n = 1; n <= options.counts_n_max; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int a = 0; a + c <= n; ++a) {
        const int b = n - a - c;
        for (int k = 0; k <= a + c; ++k) {
          for (int l = 0; l <= b + c; ++l) {
            const CountConfig query{a, b, c, k, l};
            if (is_structural_zero(query)) continue;
            const SeriesEstimate series = extractor.counts(query);
            CountVerdict verdict;
            verdict.query = query;
            verdict.closed_forms = {p0(query, extractor.thetas()), p1(query, extractor.thetas())};
            for (std::size_t r = 0; r < 2; ++r) {
              verdict.estimates[r] = series.coefficients[r];
              verdict.errors[r] = coefficient_error(series.coefficients[r], verdict.closed_forms[r],
                                                    verdict.closed_forms[0]);
              report.worst_count_error[r] = std::max(report.worst_count_error[r], verdict.errors[r]);
              if (!(verdict.errors[r] <= ctol[r])) verdict.passed = false;
            }
            verdict.extensions = series.extensions;
            if (!series.converged) {
              verdict.passed = false;
              verdict.diagnostic = series.diagnostic;
            }
            if (!verdict.passed) ++report.failures;
            report.counts.push_back(std::move(verdict));
          }
        }
      }
    }
  }
  return report;
}

void write_report(std::ostream& out, const VerifyReport& report, bool verbose) {
  for (const auto& v : report.configs) {
    if (v.passed && !verbose) continue;
    out << (v.passed ? "PASS " : "FAIL ") << to_json_string(v.config);
    for (std::size_t r = 0; r < v.errors.size(); ++r) {
      out << " q" << r << "_hat=" << fmt(v.estimates[r].get_d()) << " q" << r << "=" << fmt(v.closed_forms[r].get_d())
          << " err" << r << "=" << fmt(v.errors[r]);
    }
    if (v.extensions > 0) out << " extensions=" << v.extensions;
    out << '\n';
    if (v.unexplained) {
      out << "  q2_hat - q2_ab0 - sigma = " << to_string(*v.unexplained) << " (" << fmt(v.unexplained->get_d())
          << ")\n";
    }
    if (v.sigma_breakdown) {
      for (std::size_t t = 0; t < kSigmaTermCount; ++t) {
        if (v.sigma_breakdown->terms[t] == 0) continue;
        out << "  sigma[" << t << "] " << sigma_term_name(t) << " = " << fmt(v.sigma_breakdown->terms[t].get_d())
            << '\n';
      }
    }
    if (!v.diagnostic.empty()) out << "  " << v.diagnostic << '\n';
  }
  for (const auto& v : report.counts) {
    if (v.passed && !verbose) continue;
    out << (v.passed ? "PASS " : "FAIL ") << "counts " << to_string(v.query);
    for (std::size_t r = 0; r < 2; ++r) {
      out << " p" << r << "_hat=" << fmt(v.estimates[r].get_d()) << " p" << r << "=" << fmt(v.closed_forms[r].get_d())
          << " err" << r << "=" << fmt(v.errors[r]);
    }
    if (v.extensions > 0) out << " extensions=" << v.extensions;
    out << '\n';
    if (!v.diagnostic.empty()) out << "  " << v.diagnostic << '\n';
  }
  out << "configs: " << report.configs.size() << ", count queries: " << report.counts.size()
      << ", failures: " << report.failures << '\n';
  out << "worst error q0/q1/q2: " << fmt(report.worst_error[0]) << " " << fmt(report.worst_error[1]) << " "
      << fmt(report.worst_error[2]) << "; p0/p1: " << fmt(report.worst_count_error[0]) << " "
      << fmt(report.worst_count_error[1]) << '\n';
}

}  // namespace twolocus
