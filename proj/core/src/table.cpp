#include "twolocus/table.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "twolocus/asymptotic.hpp"
#include "twolocus/errors.hpp"
#include "twolocus/two_locus.hpp"

namespace twolocus {

std::string_view to_string(TableMethod method) {
  switch (method) {
    case TableMethod::exact:
      return "exact";
    case TableMethod::asymptotic0:
      return "asymptotic-0";
    case TableMethod::asymptotic1:
      return "asymptotic-1";
    case TableMethod::asymptotic2:
      return "asymptotic-2";
  }
  return "exact";
}

TableMethod parse_table_method(std::string_view name) {
  for (auto m : {TableMethod::exact, TableMethod::asymptotic0, TableMethod::asymptotic1, TableMethod::asymptotic2}) {
    if (name == to_string(m)) return m;
  }
  throw ParameterError("unknown method '" + std::string(name) + "' (exact, asymptotic-0, asymptotic-1, asymptotic-2)");
}

std::string_view to_string(TableFormat format) { return format == TableFormat::csv ? "csv" : "json"; }

TableFormat parse_table_format(std::string_view name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "json") return TableFormat::json;
  throw ParameterError("unknown format '" + std::string(name) + "' (csv, json)");
}

void TableSpec::validate() const {
  if (theta_a.empty() || theta_b.empty() || rho.empty()) throw ParameterError("table grids must be nonempty");
  for (const auto& t : theta_a) {
    if (t <= 0) throw ParameterError("theta_a grid values must be positive");
  }
  for (const auto& t : theta_b) {
    if (t <= 0) throw ParameterError("theta_b grid values must be positive");
  }
  for (const auto& r : rho) {
    if (r < 0) throw ParameterError("rho grid values must be nonnegative");
  }
  if (n_max < 0) throw ParameterError("n_max must be nonnegative");
}

namespace {

Rational rational_from_json(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number()) return parse_rational(v.dump());
  throw ParameterError("'" + key + "' entries must be numbers or strings");
}

std::vector<Rational> grid_from_json(const nlohmann::json& v, const std::string& key) {
  std::vector<Rational> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(rational_from_json(x, key));
  } else {
    out.push_back(rational_from_json(v, key));
  }
  return out;
}

nlohmann::json grid_to_json(const std::vector<Rational>& grid) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : grid) out.push_back(to_string(x));
  return out;
}

int int_from_json(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ParameterError("'" + key + "' must be an integer");
  return v.get<int>();
}

std::string string_from_json(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ParameterError("'" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

TableSpec table_spec_from_json(const nlohmann::json& value) {
  if (!value.is_object()) throw ParameterError("table spec must be a JSON object");
  TableSpec spec;
  for (const auto& [key, v] : value.items()) {
    if (key == "n_max") {
      spec.n_max = int_from_json(v, key);
    } else if (key == "max_a_alleles") {
      spec.limits.max_a_alleles = int_from_json(v, key);
    } else if (key == "max_b_alleles") {
      spec.limits.max_b_alleles = int_from_json(v, key);
    } else if (key == "max_typed") {
      spec.limits.max_typed = int_from_json(v, key);
    } else if (key == "configs") {
      if (!v.is_array()) throw ParameterError("'configs' must be an array of configurations");
      for (const auto& c : v) spec.configs.push_back(c.is_string() ? parse_config(c.get<std::string>()) : config_from_json(c));
    } else if (key == "theta_a") {
      spec.theta_a = grid_from_json(v, key);
    } else if (key == "theta_b") {
      spec.theta_b = grid_from_json(v, key);
    } else if (key == "rho") {
      spec.rho = grid_from_json(v, key);
    } else if (key == "method") {
      spec.method = parse_table_method(string_from_json(v, key));
    } else if (key == "format") {
      spec.format = parse_table_format(string_from_json(v, key));
    } else if (key == "backend") {
      spec.backend = parse_backend(string_from_json(v, key));
    } else if (key == "max_states") {
      const int states = int_from_json(v, key);
      if (states <= 0) throw ParameterError("'max_states' must be positive");
      spec.max_states = static_cast<std::size_t>(states);
    } else {
      throw ParameterError("unexpected key '" + key + "' in table spec");
    }
  }
  spec.validate();
  return spec;
}

nlohmann::json to_json(const TableSpec& spec) {
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& c : spec.configs) configs.push_back(to_json(c));
  return {{"n_max", spec.n_max},
          {"max_a_alleles", spec.limits.max_a_alleles},
          {"max_b_alleles", spec.limits.max_b_alleles},
          {"max_typed", spec.limits.max_typed},
          {"configs", configs},
          {"theta_a", grid_to_json(spec.theta_a)},
          {"theta_b", grid_to_json(spec.theta_b)},
          {"rho", grid_to_json(spec.rho)},
          {"method", to_string(spec.method)},
          {"format", to_string(spec.format)},
          {"backend", to_string(spec.backend)},
          {"max_states", spec.max_states}};
}

namespace {

template <Scalar S>
class RowEvaluator {
 public:
  RowEvaluator(const TableSpec& spec) : spec_(spec) {}

  void fill(TableRow& row) {
    const Params<S> params{from_rational<S>(row.theta_a), from_rational<S>(row.theta_b), from_rational<S>(row.rho)};
    if (spec_.method == TableMethod::exact) {
      row.value = to_string(golding(row).probability(row.config));
      return;
    }
    params.validate();
    const S v0 = q0(row.config, params);
    S value = v0;
    row.q0 = to_string(v0);
    if (spec_.method == TableMethod::asymptotic0) {
      row.value = to_string(value);
      return;
    }
    if (!(params.rho > 0)) throw ParameterError("expansion orders above 0 need rho > 0");
    const S v1 = S(q1(row.config, params) / params.rho);
    value += v1;
    row.q1_over_rho = to_string(v1);
    if (spec_.method == TableMethod::asymptotic2) {
      const S v2 = S(q2(row.config, second_order(row)) / (params.rho * params.rho));
      value += v2;
      row.q2_over_rho2 = to_string(v2);
    }
    row.value = to_string(value);
  }

 private:
  using Key = std::tuple<Rational, Rational, Rational>;

  GoldingSolver<S>& golding(const TableRow& row) {
    Key key{row.theta_a, row.theta_b, row.rho};
    auto it = golding_.find(key);
    if (it == golding_.end()) {
      Params<S> params{from_rational<S>(row.theta_a), from_rational<S>(row.theta_b), from_rational<S>(row.rho)};
      SolverLimits limits;
      limits.max_states = spec_.max_states;
      it = golding_.emplace(key, GoldingSolver<S>(params, limits)).first;
    }
    return it->second;
  }

  SecondOrderSolver<S>& second_order(const TableRow& row) {
    Key key{row.theta_a, row.theta_b, Rational(0)};
    auto it = second_.find(key);
    if (it == second_.end()) {
      Params<S> params{from_rational<S>(row.theta_a), from_rational<S>(row.theta_b), from_int<S>(0)};
      it = second_.emplace(key, SecondOrderSolver<S>(params)).first;
    }
    return it->second;
  }

  const TableSpec& spec_;
  std::map<Key, GoldingSolver<S>> golding_;
  std::map<Key, SecondOrderSolver<S>> second_;
};

template <Scalar S>
std::vector<TableRow> generate_rows(const TableSpec& spec, const std::vector<TwoLocusConfig>& configs) {
  RowEvaluator<S> evaluator(spec);
  std::vector<TableRow> rows;
  for (const auto& config : configs) {
    for (const auto& ta : spec.theta_a) {
      for (const auto& tb : spec.theta_b) {
        for (const auto& rho : spec.rho) {
          TableRow row;
          row.config = config;
          row.theta_a = ta;
          row.theta_b = tb;
          row.rho = rho;
          row.method = spec.method;
          try {
            evaluator.fill(row);
          } catch (const std::exception& e) {
            row.value.clear();
            row.q0.clear();
            row.q1_over_rho.clear();
            row.q2_over_rho2.clear();
            row.error = e.what();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<TableRow> generate_table(const TableSpec& spec) {
  spec.validate();
  std::vector<TwoLocusConfig> configs;
  std::set<TwoLocusConfig> seen;
  if (spec.n_max >= 1) {
    for (auto& c : enumerate_canonical_configs(spec.n_max, spec.limits)) {
      if (seen.insert(c).second) configs.push_back(c);
    }
  }
  for (const auto& c : spec.configs) {
    TwoLocusConfig key = canonical(c);
    if (seen.insert(key).second) configs.push_back(std::move(key));
  }
  if (spec.backend == Backend::rational) return generate_rows<Rational>(spec, configs);
  return generate_rows<double>(spec, configs);
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json json_scalar(const std::string& text) {
  if (text.empty()) return nullptr;
  // Doubles become numbers; exact fractions stay strings.
  if (text.find('/') == std::string::npos) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
      return text;
    }
  }
  return text;
}

}  // namespace

void write_table(std::ostream& out, const std::vector<TableRow>& rows, TableFormat format) {
  if (format == TableFormat::csv) {
    out << kTableCsvHeader << '\n';
    for (const auto& row : rows) {
      out << csv_field(to_json_string(row.config)) << ',' << to_string(row.theta_a) << ',' << to_string(row.theta_b)
          << ',' << to_string(row.rho) << ',' << to_string(row.method) << ',' << row.value << ',' << row.q0 << ','
          << row.q1_over_rho << ',' << row.q2_over_rho2 << ',' << csv_field(row.error) << '\n';
    }
    return;
  }
  nlohmann::json array = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj;
    obj["config"] = to_json(row.config);
    obj["theta_a"] = to_string(row.theta_a);
    obj["theta_b"] = to_string(row.theta_b);
    obj["rho"] = to_string(row.rho);
    obj["method"] = std::string(to_string(row.method));
    obj["value"] = json_scalar(row.value);
    obj["q0"] = json_scalar(row.q0);
    obj["q1_over_rho"] = json_scalar(row.q1_over_rho);
    obj["q2_over_rho2"] = json_scalar(row.q2_over_rho2);
    obj["error"] = row.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(row.error);
    array.push_back(std::move(obj));
  }
  out << array.dump(2) << '\n';
}

}  // namespace twolocus
