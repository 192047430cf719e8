// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run AC1..AC8
//   acceptance AC3 AC5    run a subset

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "twolocus/allele_counts.hpp"
#include "twolocus/asymptotic.hpp"
#include "twolocus/errors.hpp"
#include "twolocus/harness.hpp"
#include "twolocus/one_locus.hpp"
#include "twolocus/two_locus.hpp"

using namespace twolocus;
using twolocus::testing::Rng;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

Rational q(const char* text) { return parse_rational(text); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Every criterion records its first few failures and a summary.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (examples_.size() < 5) examples_.push_back(what);
  }
  Outcome finish(const std::string& summary) const {
    Outcome out;
    out.passed = failures_ == 0 && checks_ > 0;
    std::ostringstream text;
    text << summary << "; " << checks_ << " checks, " << failures_ << " failed";
    for (const auto& e : examples_) text << "\n      " << e;
    out.detail = text.str();
    return out;
  }
  std::size_t checks() const { return checks_; }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> examples_;
};

std::string show(const TwoLocusConfig& c) { return to_json_string(c); }

Outcome ac1() {
  Checker ck;
  for (const char* theta_text : {"1/2", "1", "3"}) {
    const Rational theta = q(theta_text);
    for (int n = 1; n <= 10; ++n) {
      for (const auto& parts : testing::partitions(n)) {
        const OneLocusConfig config(parts);
        const Rational ordered = esf_ordered(config, theta);
        const Rational unordered = esf_unordered(config, theta);
        std::string label = "n=" + std::to_string(n) + " theta=" + theta_text;
        ck.check(unordered == Rational(orderings_count(config)) * ordered, "p != orderings*q at " + label);
        ck.check(one_locus_recursion_residual(config, theta) == 0, "recursion residual at " + label);
      }
    }
    const OneLocusConfig example({2, 1, 1});
    ck.check(esf_unordered(example, theta) == 6 * esf_ordered(example, theta), "p(2,1,1) != 6 q(2,1,1)");
  }
  return ck.finish("one-locus partitions n<=10, theta in {1/2,1,3}");
}

Outcome ac2() {
  Checker ck;
  const Params<Rational> params{q("1/2"), q("3/2"), q("5/2")};
  GoldingSolver<Rational> solver(params);
  ck.check(solver.probability(TwoLocusConfig({1}, {}, {})) == 1, "q(e_i,0,0) != 1");
  ck.check(solver.probability(TwoLocusConfig({}, {1}, {})) == 1, "q(0,e_j,0) != 1");
  Rng rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const TwoLocusConfig config = testing::random_config(rng, 6);
    GoldingSolver<Rational> fresh(params);
    const Rational value = fresh.probability(config);
    const auto rows = testing::random_permutation(rng, config.num_a_alleles());
    const auto cols = testing::random_permutation(rng, config.num_b_alleles());
    const TwoLocusConfig permuted = testing::relabel(config, rows, cols);
    GoldingSolver<Rational> other(params);
    ck.check(other.probability(permuted) == value, "relabel changed q at " + show(config));
    GoldingSolver<Rational> swapped(params.swapped());
    ck.check(swapped.probability(config.transposed()) == value, "locus swap changed q at " + show(config));
    ck.check(other.residual(permuted) == 0, "recursion residual at " + show(permuted));
  }
  return ck.finish("boundaries, 200 random configurations n<=6 at theta=(1/2,3/2), rho=5/2");
}

Outcome ac3() {
  Checker ck;
  const Params<Rational> params{Rational(1), Rational(1), Rational(100000000)};
  GoldingSolver<Rational> solver(params);
  double worst = 0;
  for (const auto& config : enumerate_canonical_configs(6, {})) {
    const Rational exact = solver.probability(config);
    const Rational leading = q0(config, params);
    const double err = Rational(abs(exact - leading) / leading).get_d();
    worst = std::max(worst, err);
    ck.check(err <= 1e-6, "rel error " + fmt(err) + " at " + show(config));
  }
  return ck.finish("n<=6, K,L<=2, rho=1e8, worst relative error " + fmt(worst));
}

Outcome ac4() {
  Checker ck;
  VerifyOptions options;
  options.n_max = 6;
  options.max_order = 1;
  const VerifyReport report = verify_sweep(options);
  for (const auto& v : report.configs) ck.check(v.passed, "q1_hat mismatch at " + show(v.config));

  // c = 0: rho (q - q0) must shrink by the schedule ratio.
  SeriesExtractor extractor(options.thetas, default_rho_schedule());
  for (const auto& config : enumerate_canonical_configs(6, {2, 2, 0})) {
    const SeriesEstimate s = extractor.two_locus(config);
    const auto& seq = s.scaled[1];
    bool decays = true;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      if (seq[k] == 0) {
        decays = decays && seq[k + 1] == 0;
      } else {
        decays = decays && abs(seq[k + 1]) <= Rational(1, 5) * abs(seq[k]);
      }
    }
    ck.check(decays && q1(config, options.thetas) == 0, "q1_hat does not decay like 1/rho at " + show(config));
  }

  for (const auto& thetas : {Params<Rational>{Rational(1), Rational(1), Rational(0)},
                             Params<Rational>{q("1/2"), q("3"), Rational(0)}}) {
    for (const auto& config : enumerate_canonical_configs(7, {2, 2, 5})) {
      ck.check(q1(config, thetas) == q1_subsampling_oracle(config, thetas),
               "q1 != subsampling oracle at " + show(config));
    }
  }
  return ck.finish("n<=6 sweep (" + std::to_string(report.configs.size()) + " configs, worst q1 error " +
                   fmt(report.worst_error[1]) + "), c<=5 oracle");
}

std::vector<TwoLocusConfig> spot_set_n10() {
  using M = std::vector<std::vector<int>>;
  return {
      TwoLocusConfig::from_matrix({5, 5}, {}, M{{}, {}}),
      TwoLocusConfig::from_matrix({6}, {4}, {{0}}),
      TwoLocusConfig::from_matrix({3, 2}, {2, 1}, M{{1, 0}, {0, 1}}),
      TwoLocusConfig::from_matrix({4}, {3}, M{{3}}),
      TwoLocusConfig::from_matrix({2, 1}, {1, 2}, M{{1, 1}, {1, 1}}),
      TwoLocusConfig::from_matrix({1, 1}, {1, 1}, M{{2, 1}, {0, 3}}),
      TwoLocusConfig::from_matrix({3}, {1, 1}, M{{2, 3}}),
      TwoLocusConfig::from_matrix({}, {6, 4}, M{}),
  };
}

Outcome ac5() {
  Checker ck;
  VerifyOptions options;
  options.n_max = 8;
  options.max_order = 2;
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport sweep = verify_sweep(options);
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& v : sweep.configs) {
    std::string what = "q2_hat mismatch at " + show(v.config);
    if (v.unexplained) what += " (unexplained " + to_string(v.unexplained->get_d()) + ")";
    ck.check(v.passed, what);
  }
  ck.check(sweep_s <= 600, "n<=8 sweep took " + fmt(sweep_s) + " s");

  VerifyOptions spot;
  spot.n_max = 0;
  spot.max_order = 2;
  for (auto& config : spot_set_n10()) {
    validate(config);
    spot.extra_configs.push_back(canonical(config));
  }
  for (const auto& config : spot.extra_configs) ck.check(config.sample_size() == 10, "spot set entry " + show(config));
  const auto t1 = std::chrono::steady_clock::now();
  const VerifyReport spot_report = verify_sweep(spot);
  const double spot_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  for (const auto& v : spot_report.configs) ck.check(v.passed, "n=10 spot mismatch at " + show(v.config));
  ck.check(spot_report.configs.size() >= 6, "n=10 spot set too small");
  ck.check(spot_s <= 1800, "n=10 spot set took " + fmt(spot_s) + " s");
  return ck.finish("n<=8 sweep " + std::to_string(sweep.configs.size()) + " configs in " + fmt(sweep_s) +
                   " s (worst q2 error " + fmt(sweep.worst_error[2]) + "), n=10 spot set " +
                   std::to_string(spot_report.configs.size()) + " configs in " + fmt(spot_s) + " s (worst " +
                   fmt(spot_report.worst_error[2]) + ")");
}

Outcome ac6() {
  Checker ck;
  for (const auto& params : {Params<Rational>{Rational(1), Rational(1), q("5/2")},
                             Params<Rational>{q("1/2"), q("3"), Rational(0)},
                             Params<Rational>{q("2"), q("1/3"), q("40")}}) {
    CountSolver<Rational> solver(params);
    for (int n = 1; n <= 8; ++n) {
      for (int c = 0; c <= n; ++c) {
        for (int a = 0; a + c <= n; ++a) {
          const int b = n - a - c;
          Rational total = 0;
          Rational first = 0;
          for (int k = 0; k <= a + c; ++k) {
            for (int l = 0; l <= b + c; ++l) {
              total += solver.probability({a, b, c, k, l});
              first += p1(CountConfig{a, b, c, k, l}, params);
            }
          }
          const std::string label = "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
          ck.check(total == 1, "pmf does not sum to 1 at " + label);
          ck.check(first == 0, "sum of p1 != 0 at " + label);
        }
      }
    }
  }
  VerifyOptions options;
  options.n_max = 0;
  options.counts_n_max = 6;
  const VerifyReport report = verify_sweep(options);
  for (const auto& v : report.counts) ck.check(v.passed, "p0/p1 mismatch at " + to_string(v.query));
  return ck.finish("normalization and sum p1 = 0 for a+b+c<=8 over 3 parameter sets, " +
                   std::to_string(report.counts.size()) + " queries a+b+c<=6 (worst p0 " +
                   fmt(report.worst_count_error[0]) + ", p1 " + fmt(report.worst_count_error[1]) + ")");
}

Outcome ac7() {
  Checker ck;
  const std::vector<Rational> schedule{Rational(1000), Rational(10000), Rational(100000), Rational(1000000)};
  const Params<Rational> thetas{Rational(1), Rational(1), Rational(0)};
  SeriesExtractor extractor(thetas, schedule);
  using M = std::vector<std::vector<int>>;
  const std::vector<TwoLocusConfig> configs{
      TwoLocusConfig::from_matrix({0}, {0}, M{{2}}),
      TwoLocusConfig::from_matrix({1}, {1}, M{{1}}),
      TwoLocusConfig::from_matrix({0, 0}, {0, 0}, M{{1, 1}, {1, 1}}),
      TwoLocusConfig::from_matrix({2, 1}, {1, 0}, M{{1, 0}, {0, 2}}),
      TwoLocusConfig::from_matrix({3}, {2}, {{0}}),
  };
  for (const auto& config : configs) {
    const SeriesEstimate s = extractor.two_locus(config);
    ck.check(residual_law_holds(s.residual_decay), "two-locus residual law fails at " + show(config));
  }
  const std::vector<CountConfig> queries{{0, 0, 2, 1, 1}, {1, 1, 2, 2, 1}, {0, 0, 4, 2, 2}, {2, 1, 3, 3, 2}, {3, 2, 0, 2, 1}};
  for (const auto& query : queries) {
    const SeriesEstimate s = extractor.counts(query);
    ck.check(residual_law_holds(s.residual_decay), "count residual law fails at " + to_string(query));
  }
  return ck.finish("5 configurations (r=0,1,2) and 5 count queries (r=0,1), rho in 1e3..1e6, growth factor <= 2");
}

Outcome ac8() {
  Checker ck;
  const Params<double> params{1.0, 1.0, 10.0};
  double slowest = 0;
  std::string slowest_config;
  std::size_t configs = 0;
  for (const auto& config : enumerate_canonical_configs(8, {2, 2, 6})) {
    const auto t0 = std::chrono::steady_clock::now();
    GoldingSolver<double> solver(params);
    const double value = solver.probability(config);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++configs;
    if (s > slowest) {
      slowest = s;
      slowest_config = show(config);
    }
    ck.check(s <= 60, "took " + fmt(s) + " s at " + show(config));
    ck.check(value > 0 && value <= 1, "value out of range at " + show(config));
  }

  SolverLimits tight;
  tight.max_states = 50;
  GoldingSolver<double> solver(params, tight);
  const auto big = TwoLocusConfig::from_matrix({0, 0}, {0, 0}, {{3, 1}, {0, 2}});
  bool raised = false;
  try {
    solver.probability(big);
  } catch (const CapabilityError& e) {
    raised = std::string(e.what()).find("state") != std::string::npos;
  }
  ck.check(raised, "no CapabilityError beyond the state budget");
  ck.check(solver.probability(TwoLocusConfig({1}, {1}, {0})) == 1.0, "solver unusable after a capability error");
  return ck.finish(std::to_string(configs) + " configurations with c<=6 (n<=8, K,L<=2), float backend, slowest " +
                   fmt(slowest) + " s at " + slowest_config + "; capability error at 50 states");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
  std::set<std::string> selected(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && !selected.count(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!outcome.passed) ++failed;
    std::cout << name << ' ' << (outcome.passed ? "PASS" : "FAIL") << " (" << fmt(s) << " s) " << outcome.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
