#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "twolocus/allele_counts.hpp"
#include "twolocus/asymptotic.hpp"
#include "twolocus/errors.hpp"
#include "twolocus/harness.hpp"
#include "twolocus/one_locus.hpp"
#include "twolocus/table.hpp"
#include "twolocus/two_locus.hpp"

namespace twolocus::cli {
namespace {

// Run files are JSON objects whose keys are option names of the selected
// subcommand ("theta_a" and "theta-a" both select --theta-a). Arrays feed
// multi-valued options. Options given on the command line win.
class JsonRunFile : public CLI::Config {
 public:
  explicit JsonRunFile(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConfigError("run file is not valid JSON (byte " + std::to_string(e.byte) + "): " + e.what());
    }
    if (!doc.is_object()) throw CLI::ConfigError("run file must hold a JSON object");
    std::vector<std::string> parents;
    for (const auto* sub : root_->get_subcommands()) parents.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar_text(v));
      } else {
        item.inputs.push_back(scalar_text(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  const CLI::App* root_;
};

using Record = std::vector<std::pair<std::string, std::string>>;

enum class OutputFormat { plain, csv, json };

OutputFormat parse_output_format(const std::string& name) {
  if (name.empty()) return OutputFormat::plain;
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ParameterError("unknown format '" + name + "' (csv, json)");
}

nlohmann::json json_value(const std::string& text) {
  if (text.find('/') == std::string::npos) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
    }
  }
  return text;
}

void render(std::ostream& out, const std::vector<Record>& records, OutputFormat format) {
  switch (format) {
    case OutputFormat::plain:
      if (records.size() == 1 && records[0].size() == 1) {
        out << records[0][0].second << '\n';
        return;
      }
      for (const auto& record : records) {
        for (std::size_t i = 0; i < record.size(); ++i) {
          out << (i ? " " : "") << record[i].first << '=' << record[i].second;
        }
        out << '\n';
      }
      return;
    case OutputFormat::csv:
      if (records.empty()) return;
      for (std::size_t i = 0; i < records[0].size(); ++i) out << (i ? "," : "") << records[0][i].first;
      out << '\n';
      for (const auto& record : records) {
        for (std::size_t i = 0; i < record.size(); ++i) out << (i ? "," : "") << record[i].second;
        out << '\n';
      }
      return;
    case OutputFormat::json: {
      nlohmann::json array = nlohmann::json::array();
      for (const auto& record : records) {
        nlohmann::json obj = nlohmann::json::object();
        for (const auto& [key, value] : record) obj[key] = json_value(value);
        array.push_back(std::move(obj));
      }
      out << (records.size() == 1 ? array[0] : array).dump() << '\n';
      return;
    }
  }
}

// Options shared by the computing subcommands.
struct Common {
  std::string backend = "rational";
  std::string format;
  std::string theta_a = "1";
  std::string theta_b = "1";
  std::string rho;
  std::size_t max_states = 1'000'000;
};

Params<Rational> rational_params(const Common& common, bool need_rho) {
  if (need_rho && common.rho.empty()) throw ParameterError("--rho is required");
  Params<Rational> params{parse_rational(common.theta_a), parse_rational(common.theta_b),
                          common.rho.empty() ? Rational(0) : parse_rational(common.rho)};
  params.validate();
  return params;
}

template <Scalar S>
Params<S> params_as(const Params<Rational>& params) {
  return convert_params<S>(params);
}

void add_backend(CLI::App* app, std::string& backend) {
  app->add_option("--backend", backend, "Scalar backend: rational (exact) or float")
      ->check(CLI::IsMember({"rational", "float"}))
      ->capture_default_str();
}

void add_format(CLI::App* app, Common& common) {
  app->add_option("--format", common.format, "Output format: csv or json (default: plain)")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_rates(CLI::App* app, Common& common, bool with_rho) {
  app->add_option("--theta-a", common.theta_a, "Mutation rate at locus A (e.g. 1, 0.5, 1/2)")->capture_default_str();
  app->add_option("--theta-b", common.theta_b, "Mutation rate at locus B")->capture_default_str();
  if (with_rho) app->add_option("--rho", common.rho, "Recombination rate");
}

template <typename F>
auto with_backend(const std::string& backend, F&& f) {
  if (parse_backend(backend) == Backend::rational) return f(Rational{});
  return f(double{});
}

struct State {
  Common common;
  // esf
  std::vector<int> counts;
  std::string theta = "1";
  int n = -1;
  int k = -1;
  // exact / asym
  std::string config;
  int order = 2;
  bool terms = false;
  bool sigma_terms = false;
  // counts
  int ca = 0, cb = 0, cc = 0;
  int kk = -1, ll = -1;
  std::string method = "exact";
  // verify / table
  int n_max = 4;
  int max_a = 2;
  int max_b = 2;
  int max_typed = -1;
  int counts_n_max = -2;
  int max_extensions = 2;
  std::vector<std::string> rho_schedule;
  std::vector<std::string> configs;
  double tol_q0 = 1e-6, tol_q1 = 1e-6, tol_q2 = 1e-4, tol_p0 = 1e-6, tol_p1 = 1e-6;
  bool verbose = false;
  std::vector<std::string> theta_a_grid{"1"};
  std::vector<std::string> theta_b_grid{"1"};
  std::vector<std::string> rho_grid;
  std::string output;
  std::optional<int> table_order;
  std::string table_backend = "float";
};

int run_esf(State& s, std::ostream& out) {
  const OutputFormat format = parse_output_format(s.common.format);
  const Rational theta = parse_rational(s.theta);
  if (theta <= 0) throw ParameterError("theta must be positive");
  std::vector<Record> records;
  with_backend(s.common.backend, [&](auto tag) {
    using S = decltype(tag);
    const S t = from_rational<S>(theta);
    if (!s.counts.empty()) {
      const OneLocusConfig config(s.counts);
      records.push_back({{"q", to_string(esf_ordered<S>(config, t))},
                         {"p", to_string(esf_unordered<S>(config, t))},
                         {"orderings", orderings_count(config).get_str()}});
    }
    if (s.n >= 0) {
      if (s.k >= 0) {
        records.push_back({{"n", std::to_string(s.n)}, {"k", std::to_string(s.k)},
                           {"pmf", to_string(allele_count_pmf<S>(s.n, s.k, t))}});
      } else {
        for (int k = 0; k <= s.n; ++k) {
          if (s.n > 0 && k == 0) continue;
          records.push_back({{"n", std::to_string(s.n)}, {"k", std::to_string(k)},
                             {"pmf", to_string(allele_count_pmf<S>(s.n, k, t))}});
        }
      }
    }
    return 0;
  });
  if (records.empty()) throw ParameterError("esf needs --counts or --n");
  render(out, records, format);
  return ok;
}

int run_exact(State& s, std::ostream& out) {
  const OutputFormat format = parse_output_format(s.common.format);
  const TwoLocusConfig config = parse_config(s.config);
  const Params<Rational> params = rational_params(s.common, true);
  SolverLimits limits;
  limits.max_states = s.common.max_states;
  const std::string value = with_backend(s.common.backend, [&](auto tag) {
    using S = decltype(tag);
    return to_string(exact_q<S>(config, params_as<S>(params), limits));
  });
  render(out, {{{"q", value}}}, format);
  return ok;
}

int run_asym(State& s, std::ostream& out) {
  const OutputFormat format = parse_output_format(s.common.format);
  const TwoLocusConfig config = parse_config(s.config);
  const ExpansionOrder order = expansion_order(s.order);
  const Params<Rational> params = rational_params(s.common, order != ExpansionOrder::zeroth);
  std::vector<Record> records;
  with_backend(s.common.backend, [&](auto tag) {
    using S = decltype(tag);
    const Params<S> p = params_as<S>(params);
    const S value = q_asymptotic<S>(config, p, order);
    if (s.terms) {
      Record r{{"q0", to_string(q0<S>(config, p))}};
      if (order != ExpansionOrder::zeroth) r.emplace_back("q1", to_string(q1<S>(config, p)));
      if (order == ExpansionOrder::second) {
        SecondOrderSolver<S> solver(p);
        r.emplace_back("q2_ab0", to_string(solver.value(config.a_marginal(), config.b_marginal())));
        r.emplace_back("sigma", to_string(sigma<S>(config, p)));
        r.emplace_back("q2", to_string(q2<S>(config, solver)));
      }
      r.emplace_back("value", to_string(value));
      records.push_back(std::move(r));
    } else {
      records.push_back({{"value", to_string(value)}});
    }
    if (s.sigma_terms) {
      const SigmaBreakdown<S> breakdown = sigma_terms<S>(config, p);
      for (std::size_t t = 0; t < kSigmaTermCount; ++t) {
        records.push_back({{"term", std::to_string(t)}, {"name", std::string(sigma_term_name(t))},
                           {"value", to_string(breakdown.terms[t])}});
      }
    }
    return 0;
  });
  if (s.sigma_terms && format == OutputFormat::csv) {
    // Mixed record shapes do not fit one CSV header.
    render(out, {records.begin(), records.begin() + 1}, format);
    render(out, {records.begin() + 1, records.end()}, format);
  } else {
    render(out, records, format);
  }
  return ok;
}

int run_counts(State& s, std::ostream& out) {
  const OutputFormat format = parse_output_format(s.common.format);
  const bool asymptotic = s.method == "asymptotic";
  if (!asymptotic && s.method != "exact") throw ParameterError("--method must be exact or asymptotic");
  if (s.ca < 0 || s.cb < 0 || s.cc < 0 || s.ca + s.cb + s.cc < 1) {
    throw ParameterError("counts needs nonnegative --a, --b, --c with a + b + c >= 1");
  }
  const int order = s.order > 1 ? 1 : s.order;
  if (asymptotic && (s.order < 0 || s.order > 1)) throw ParameterError("--order must be 0 or 1 for allele counts");
  const Params<Rational> params = rational_params(s.common, !asymptotic || order == 1);
  SolverLimits limits;
  limits.max_states = s.common.max_states;

  std::vector<std::pair<int, int>> cells;
  if (s.kk >= 0 && s.ll >= 0) {
    cells.emplace_back(s.kk, s.ll);
  } else {
    for (int k = 0; k <= s.ca + s.cc; ++k) {
      for (int l = 0; l <= s.cb + s.cc; ++l) {
        if (s.kk >= 0 && k != s.kk) continue;
        if (s.ll >= 0 && l != s.ll) continue;
        if (!is_structural_zero({s.ca, s.cb, s.cc, k, l})) cells.emplace_back(k, l);
      }
    }
  }
  std::vector<Record> records;
  with_backend(s.common.backend, [&](auto tag) {
    using S = decltype(tag);
    const Params<S> p = params_as<S>(params);
    std::optional<CountSolver<S>> solver;
    if (!asymptotic) solver.emplace(p, limits);
    for (const auto& [k, l] : cells) {
      const CountConfig q{s.ca, s.cb, s.cc, k, l};
      const S value = asymptotic ? count_pmf_asymptotic<S>(q, p, expansion_order(order)) : solver->probability(q);
      records.push_back({{"k", std::to_string(k)}, {"l", std::to_string(l)}, {"p", to_string(value)}});
    }
    return 0;
  });
  if (records.size() == 1) records[0] = {records[0].back()};
  render(out, records, format);
  return ok;
}

int run_verify(State& s, std::ostream& out) {
  if (parse_backend(s.common.backend) != Backend::rational) {
    throw ParameterError("verify runs on the rational backend only");
  }
  VerifyOptions options;
  options.n_max = s.n_max;
  options.limits = {s.max_a, s.max_b, s.max_typed};
  options.thetas = rational_params(s.common, false);
  if (!s.rho_schedule.empty()) {
    options.rho_schedule.clear();
    for (const auto& r : s.rho_schedule) options.rho_schedule.push_back(parse_rational(r));
  }
  options.tolerances = {s.tol_q0, s.tol_q1, s.tol_q2, s.tol_p0, s.tol_p1};
  if (s.order < 0 || s.order > 2) throw ParameterError("--order must be 0, 1 or 2");
  options.max_order = s.order;
  options.counts_n_max = s.counts_n_max == -2 ? s.n_max : s.counts_n_max;
  for (const auto& c : s.configs) options.extra_configs.push_back(parse_config(c));
  options.solver_limits.max_states = s.common.max_states;
  options.max_extensions = s.max_extensions;
  const VerifyReport report = verify_sweep(options);
  write_report(out, report, s.verbose);
  return report.passed() ? ok : verification_failure;
}

int run_table(State& s, std::ostream& out) {
  TableSpec spec;
  spec.n_max = s.n_max;
  spec.limits = {s.max_a, s.max_b, s.max_typed};
  for (const auto& c : s.configs) spec.configs.push_back(parse_config(c));
  for (const auto& t : s.theta_a_grid) spec.theta_a.push_back(parse_rational(t));
  for (const auto& t : s.theta_b_grid) spec.theta_b.push_back(parse_rational(t));
  for (const auto& r : s.rho_grid) spec.rho.push_back(parse_rational(r));
  if (s.method == "asymptotic") {
    spec.method = parse_table_method("asymptotic-" + std::to_string(s.table_order.value_or(2)));
  } else {
    spec.method = parse_table_method(s.method);
    if (s.table_order && spec.method != TableMethod::exact &&
        spec.method != parse_table_method("asymptotic-" + std::to_string(*s.table_order))) {
      throw ParameterError("--order contradicts --method");
    }
  }
  spec.format = s.common.format.empty() ? TableFormat::csv : parse_table_format(s.common.format);
  spec.backend = parse_backend(s.table_backend);
  spec.max_states = s.common.max_states;
  spec.validate();
  const auto rows = generate_table(spec);
  if (s.output.empty() || s.output == "-") {
    write_table(out, rows, spec.format);
  } else {
    std::ofstream file(s.output);
    if (!file) throw ParameterError("cannot write '" + s.output + "'");
    write_table(file, rows, spec.format);
  }
  return ok;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-locus sampling probabilities under the coalescent with recombination", "twolocus"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonRunFile>(&app));
  app.set_config("--run-file", "", "JSON object of option values for the subcommand");
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  State s;
  auto take_all = [](CLI::Option* opt) { return opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll); };

  auto* esf = app.add_subcommand("esf", "One-locus Ewens sampling formula: q, p and the allele-count pmf");
  take_all(esf->add_option("--counts", s.counts, "Allele multiplicities, e.g. 2 1 1")->delimiter(','));
  esf->add_option("--theta", s.theta, "Mutation rate")->capture_default_str();
  esf->add_option("--n", s.n, "Sample size for the allele-count pmf");
  esf->add_option("--k", s.k, "Number of alleles (all k when omitted)");
  add_backend(esf, s.common.backend);
  add_format(esf, s.common);

  auto* exact = app.add_subcommand("exact", "Exact two-locus probability q(a, b, c)");
  exact->add_option("--config", s.config, R"(Configuration JSON, e.g. {"a":[1],"b":[1],"c":[[0]]})")->required();
  add_rates(exact, s.common, true);
  exact->add_option("--max-states", s.common.max_states, "State budget")->capture_default_str();
  add_backend(exact, s.common.backend);
  add_format(exact, s.common);

  auto* asym = app.add_subcommand("asym", "Large-rho expansion q0 + q1/rho + q2/rho^2");
  asym->add_option("--config", s.config, "Configuration JSON")->required();
  add_rates(asym, s.common, true);
  asym->add_option("--order", s.order, "Truncation order 0, 1 or 2")->capture_default_str();
  asym->add_flag("--terms", s.terms, "Also print the individual coefficients");
  asym->add_flag("--sigma-terms", s.sigma_terms, "Also print the sigma term groups");
  add_backend(asym, s.common.backend);
  add_format(asym, s.common);

  auto* counts = app.add_subcommand("counts", "Joint pmf of the allele counts (K, L)");
  counts->add_option("--a", s.ca, "A-only gametes")->capture_default_str();
  counts->add_option("--b", s.cb, "B-only gametes")->capture_default_str();
  counts->add_option("--c", s.cc, "Fully typed gametes")->capture_default_str();
  counts->add_option("--k", s.kk, "Alleles at A (all when omitted)");
  counts->add_option("--l", s.ll, "Alleles at B (all when omitted)");
  counts->add_option("--method", s.method, "exact or asymptotic")->capture_default_str();
  counts->add_option("--order", s.order, "Asymptotic order 0 or 1");
  add_rates(counts, s.common, true);
  counts->add_option("--max-states", s.common.max_states, "State budget")->capture_default_str();
  add_backend(counts, s.common.backend);
  add_format(counts, s.common);

  auto* verify = app.add_subcommand("verify", "Check the closed forms against series extracted from the exact solvers");
  verify->add_option("--n-max", s.n_max, "Largest sample size of the enumerated family")->capture_default_str();
  verify->add_option("--max-a-alleles", s.max_a, "Largest K")->capture_default_str();
  verify->add_option("--max-b-alleles", s.max_b, "Largest L")->capture_default_str();
  verify->add_option("--max-typed", s.max_typed, "Largest c (negative: unbounded)")->capture_default_str();
  verify->add_option("--counts-n-max", s.counts_n_max, "Largest a + b + c for the allele-count check (default n-max)");
  take_all(verify->add_option("--rho-schedule", s.rho_schedule, "Increasing rho values (default 1e4 1e5 1e6 1e7)"));
  take_all(verify->add_option("--config", s.configs, "Extra configuration JSON (repeatable)"));
  verify->add_option("--order", s.order, "Highest order checked")->capture_default_str();
  verify->add_option("--max-extensions", s.max_extensions, "Extra rho decades tried when a series tail has not settled")
      ->capture_default_str();
  verify->add_option("--tol-q0", s.tol_q0)->capture_default_str();
  verify->add_option("--tol-q1", s.tol_q1)->capture_default_str();
  verify->add_option("--tol-q2", s.tol_q2)->capture_default_str();
  verify->add_option("--tol-p0", s.tol_p0)->capture_default_str();
  verify->add_option("--tol-p1", s.tol_p1)->capture_default_str();
  verify->add_flag("--verbose", s.verbose, "Report passing items too");
  add_rates(verify, s.common, false);
  verify->add_option("--max-states", s.common.max_states, "State budget per solver")->capture_default_str();
  add_backend(verify, s.common.backend);

  auto* table = app.add_subcommand("table", "Lookup table over a configuration family and a parameter grid");
  table->add_option("--n-max", s.n_max, "Largest sample size of the enumerated family (0: none)")
      ->capture_default_str();
  table->add_option("--max-a-alleles", s.max_a, "Largest K")->capture_default_str();
  table->add_option("--max-b-alleles", s.max_b, "Largest L")->capture_default_str();
  table->add_option("--max-typed", s.max_typed, "Largest c (negative: unbounded)")->capture_default_str();
  take_all(table->add_option("--config,--configs", s.configs, "Extra configuration JSON (repeatable)"));
  take_all(table->add_option("--theta-a", s.theta_a_grid, "theta_A grid")->capture_default_str());
  take_all(table->add_option("--theta-b", s.theta_b_grid, "theta_B grid")->capture_default_str());
  take_all(table->add_option("--rho", s.rho_grid, "rho grid")->required());
  table->add_option("--method", s.method, "exact, asymptotic (with --order) or asymptotic-0/1/2")
      ->capture_default_str();
  table->add_option("--order", s.table_order, "Order for --method asymptotic");
  table->add_option("--output", s.output, "Output file (default stdout)");
  table->add_option("--max-states", s.common.max_states, "State budget per solver")->capture_default_str();
  add_backend(table, s.table_backend);
  add_format(table, s.common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (esf->parsed()) return run_esf(s, out);
    if (exact->parsed()) return run_exact(s, out);
    if (asym->parsed()) return run_asym(s, out);
    if (counts->parsed()) return run_counts(s, out);
    if (verify->parsed()) return run_verify(s, out);
    if (table->parsed()) return run_table(s, out);
  } catch (const nlohmann::json::parse_error& e) {
    err << "error: malformed JSON at byte " << e.byte << ": " << e.what() << '\n';
    return usage_error;
  } catch (const CapabilityError& e) {
    err << "capability error: " << e.what() << '\n';
    return capability_error;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }
  return usage_error;
}

}  // namespace twolocus::cli
