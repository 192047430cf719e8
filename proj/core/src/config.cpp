#include "twolocus/config.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "twolocus/errors.hpp"

namespace twolocus {

TwoLocusConfig::TwoLocusConfig(std::vector<int> a_counts, std::vector<int> b_counts,
                               std::vector<int> c_row_major)
    : a(std::move(a_counts)), b(std::move(b_counts)), c(std::move(c_row_major)) {
  if (c.empty() && !a.empty() && !b.empty()) c.assign(a.size() * b.size(), 0);
  validate(*this);
}

TwoLocusConfig TwoLocusConfig::from_matrix(std::vector<int> a_counts, std::vector<int> b_counts,
                                           const std::vector<std::vector<int>>& c_matrix) {
  std::vector<int> flat;
  if (!c_matrix.empty()) {
    if (c_matrix.size() != a_counts.size()) throw ContractViolation("c must have one row per A-allele");
    for (const auto& row : c_matrix) {
      if (row.size() != b_counts.size()) throw ContractViolation("c must have one column per B-allele");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  }
  return TwoLocusConfig(std::move(a_counts), std::move(b_counts), std::move(flat));
}

int TwoLocusConfig::a_total() const { return std::accumulate(a.begin(), a.end(), 0); }
int TwoLocusConfig::b_total() const { return std::accumulate(b.begin(), b.end(), 0); }
int TwoLocusConfig::c_total() const { return std::accumulate(c.begin(), c.end(), 0); }

std::vector<int> TwoLocusConfig::c_row_sums() const {
  std::vector<int> sums(a.size(), 0);
  for (int i = 0; i < num_a_alleles(); ++i) {
    for (int j = 0; j < num_b_alleles(); ++j) sums[i] += cell(i, j);
  }
  return sums;
}

std::vector<int> TwoLocusConfig::c_col_sums() const {
  std::vector<int> sums(b.size(), 0);
  for (int i = 0; i < num_a_alleles(); ++i) {
    for (int j = 0; j < num_b_alleles(); ++j) sums[j] += cell(i, j);
  }
  return sums;
}

std::vector<int> TwoLocusConfig::a_marginal() const {
  std::vector<int> m = c_row_sums();
  for (std::size_t i = 0; i < a.size(); ++i) m[i] += a[i];
  return m;
}

std::vector<int> TwoLocusConfig::b_marginal() const {
  std::vector<int> m = c_col_sums();
  for (std::size_t j = 0; j < b.size(); ++j) m[j] += b[j];
  return m;
}

TwoLocusConfig TwoLocusConfig::transposed() const {
  TwoLocusConfig result;
  result.a = b;
  result.b = a;
  result.c.resize(c.size());
  for (int i = 0; i < num_a_alleles(); ++i) {
    for (int j = 0; j < num_b_alleles(); ++j) result.cell(j, i) = cell(i, j);
  }
  return result;
}

void TwoLocusConfig::remove_a_allele(int i) {
  const int cols = num_b_alleles();
  c.erase(c.begin() + static_cast<std::ptrdiff_t>(i) * cols, c.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols);
  a.erase(a.begin() + i);
}

void TwoLocusConfig::remove_b_allele(int j) {
  const int rows = num_a_alleles();
  const int cols = num_b_alleles();
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(rows) * (cols - 1));
  for (int i = 0; i < rows; ++i) {
    for (int jj = 0; jj < cols; ++jj) {
      if (jj != j) kept.push_back(cell(i, jj));
    }
  }
  c = std::move(kept);
  b.erase(b.begin() + j);
}

void TwoLocusConfig::add_a_allele(int count) {
  a.push_back(count);
  c.resize(c.size() + b.size(), 0);
}

void TwoLocusConfig::add_b_allele(int count) {
  const int rows = num_a_alleles();
  const int cols = num_b_alleles();
  std::vector<int> grown;
  grown.reserve(static_cast<std::size_t>(rows) * (cols + 1));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) grown.push_back(cell(i, j));
    grown.push_back(0);
  }
  c = std::move(grown);
  b.push_back(count);
}

bool is_valid(const TwoLocusConfig& config) {
  if (config.c.size() != config.a.size() * config.b.size()) return false;
  auto negative = [](int v) { return v < 0; };
  if (std::any_of(config.a.begin(), config.a.end(), negative) ||
      std::any_of(config.b.begin(), config.b.end(), negative) ||
      std::any_of(config.c.begin(), config.c.end(), negative)) {
    return false;
  }
  const auto rows = config.a_marginal();
  const auto cols = config.b_marginal();
  return std::none_of(rows.begin(), rows.end(), [](int v) { return v == 0; }) &&
         std::none_of(cols.begin(), cols.end(), [](int v) { return v == 0; });
}

void validate(const TwoLocusConfig& config) {
  if (config.c.size() != config.a.size() * config.b.size()) {
    throw ContractViolation("c must be a K x L matrix matching a and b");
  }
  if (!is_valid(config)) {
    throw ContractViolation("configuration has a negative entry or an allele with no gametes");
  }
}

std::size_t ConfigHash::operator()(const TwoLocusConfig& config) const noexcept {
  std::size_t h = config.a.size() * 31 + config.b.size();
  auto mix = [&h](int v) { h ^= std::hash<int>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (int v : config.a) mix(v);
  mix(-1);
  for (int v : config.b) mix(v);
  mix(-2);
  for (int v : config.c) mix(v);
  return h;
}

namespace {

// Column key for a fixed row order: (b_j, c_{r0 j}, c_{r1 j}, ...).
std::vector<int> column_key(const TwoLocusConfig& config, const std::vector<int>& rows, int j) {
  std::vector<int> key;
  key.reserve(rows.size() + 1);
  key.push_back(config.b[j]);
  for (int r : rows) key.push_back(config.cell(r, j));
  return key;
}

}  // namespace

CanonicalForm canonicalize(const TwoLocusConfig& config, int max_alleles) {
  const int rows = config.num_a_alleles();
  const int cols = config.num_b_alleles();
  if (rows > max_alleles || cols > max_alleles) {
    throw CapabilityError("canonicalization supports at most " + std::to_string(max_alleles) +
                          " alleles per locus (got K=" + std::to_string(rows) + ", L=" + std::to_string(cols) + ")");
  }

  // The key starts with a, so a is sorted ascending in the minimum; only rows
  // with equal a_i are free to permute.
  std::vector<int> row_order(rows);
  std::iota(row_order.begin(), row_order.end(), 0);
  std::stable_sort(row_order.begin(), row_order.end(), [&](int x, int y) { return config.a[x] < config.a[y]; });
  std::vector<std::pair<int, int>> groups;  // [begin, end) ranges of ties
  for (int begin = 0; begin < rows;) {
    int end = begin + 1;
    while (end < rows && config.a[row_order[end]] == config.a[row_order[begin]]) ++end;
    if (end - begin > 1) groups.emplace_back(begin, end);
    begin = end;
  }

  std::vector<std::vector<int>> best_key;
  std::vector<int> best_rows;
  std::vector<int> best_cols;
  bool first = true;
  while (true) {
    std::vector<std::vector<int>> keys(cols);
    for (int j = 0; j < cols; ++j) keys[j] = column_key(config, row_order, j);
    std::vector<int> col_order(cols);
    std::iota(col_order.begin(), col_order.end(), 0);
    std::stable_sort(col_order.begin(), col_order.end(), [&](int x, int y) { return keys[x] < keys[y]; });
    std::vector<std::vector<int>> candidate;
    candidate.reserve(cols);
    for (int j : col_order) candidate.push_back(keys[j]);
    if (first || candidate < best_key) {
      first = false;
      best_key = std::move(candidate);
      best_rows = row_order;
      best_cols = std::move(col_order);
    }

    // Odometer over the permutations of each tie group.
    int g = static_cast<int>(groups.size()) - 1;
    for (; g >= 0; --g) {
      auto lo = row_order.begin() + groups[g].first;
      auto hi = row_order.begin() + groups[g].second;
      if (std::next_permutation(lo, hi)) break;
    }
    if (g < 0) break;
  }

  CanonicalForm form;
  form.row_order = best_rows;
  form.col_order = best_cols;
  form.config.a.resize(rows);
  form.config.b.resize(cols);
  form.config.c.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) form.config.a[r] = config.a[best_rows[r]];
  for (int s = 0; s < cols; ++s) form.config.b[s] = config.b[best_cols[s]];
  for (int r = 0; r < rows; ++r) {
    for (int s = 0; s < cols; ++s) form.config.cell(r, s) = config.cell(best_rows[r], best_cols[s]);
  }
  return form;
}

TwoLocusConfig canonical(const TwoLocusConfig& config, int max_alleles) {
  return canonicalize(config, max_alleles).config;
}

nlohmann::json to_json(const TwoLocusConfig& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < config.num_a_alleles(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < config.num_b_alleles(); ++j) row.push_back(config.cell(i, j));
    rows.push_back(std::move(row));
  }
  nlohmann::json out = nlohmann::json::object();
  out["a"] = config.a;
  out["b"] = config.b;
  out["c"] = std::move(rows);
  return out;
}

std::string to_json_string(const TwoLocusConfig& config) { return to_json(config).dump(); }

TwoLocusConfig config_from_json(const nlohmann::json& value) {
  if (!value.is_object()) throw ContractViolation("configuration must be a JSON object with keys a, b, c");
  auto int_list = [&](const char* key) {
    std::vector<int> out;
    if (!value.contains(key)) return out;
    const auto& node = value.at(key);
    if (!node.is_array()) throw ContractViolation(std::string("'") + key + "' must be an array of integers");
    for (const auto& v : node) {
      if (!v.is_number_integer()) throw ContractViolation(std::string("'") + key + "' must be an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  };
  std::vector<int> a = int_list("a");
  std::vector<int> b = int_list("b");
  std::vector<std::vector<int>> c;
  if (value.contains("c")) {
    const auto& node = value.at("c");
    if (!node.is_array()) throw ContractViolation("'c' must be an array of rows");
    for (const auto& row : node) {
      if (!row.is_array()) throw ContractViolation("'c' must be an array of rows");
      std::vector<int> cells;
      for (const auto& v : row) {
        if (!v.is_number_integer()) throw ContractViolation("'c' entries must be integers");
        cells.push_back(v.get<int>());
      }
      c.push_back(std::move(cells));
    }
  }
  for (const auto& key : value.items()) {
    if (key.key() != "a" && key.key() != "b" && key.key() != "c") {
      throw ContractViolation("unexpected key '" + key.key() + "' in configuration");
    }
  }
  // "a": [] next to typed rows means no A-only gametes.
  if (a.empty() && !c.empty()) a.assign(c.size(), 0);
  if (b.empty() && !c.empty() && !c.front().empty()) b.assign(c.front().size(), 0);
  return TwoLocusConfig::from_matrix(std::move(a), std::move(b), c);
}

TwoLocusConfig parse_config(const std::string& text) { return config_from_json(nlohmann::json::parse(text)); }

namespace {

class Enumerator {
 public:
  Enumerator(int n_max, const EnumerationLimits& limits) : n_max_(n_max), limits_(limits) {}

  std::vector<TwoLocusConfig> run() {
    for (int rows = 0; rows <= limits_.max_a_alleles; ++rows) {
      for (int cols = 0; cols <= limits_.max_b_alleles; ++cols) {
        rows_ = rows;
        cols_ = cols;
        slots_.assign(static_cast<std::size_t>(rows + cols + rows * cols), 0);
        fill(0, 0, 0);
      }
    }
    std::vector<TwoLocusConfig> out(seen_.begin(), seen_.end());
    std::stable_sort(out.begin(), out.end(), [](const TwoLocusConfig& x, const TwoLocusConfig& y) {
      return x.sample_size() < y.sample_size();
    });
    return out;
  }

 private:
  void fill(std::size_t slot, int used, int typed) {
    if (slot == slots_.size()) {
      if (used == 0) return;
      TwoLocusConfig config;
      config.a.assign(slots_.begin(), slots_.begin() + rows_);
      config.b.assign(slots_.begin() + rows_, slots_.begin() + rows_ + cols_);
      config.c.assign(slots_.begin() + rows_ + cols_, slots_.end());
      if (is_valid(config)) seen_.insert(canonical(config));
      return;
    }
    const bool is_typed = slot >= static_cast<std::size_t>(rows_ + cols_);
    int limit = n_max_ - used;
    if (is_typed && limits_.max_typed >= 0) limit = std::min(limit, limits_.max_typed - typed);
    for (int v = 0; v <= limit; ++v) {
      slots_[slot] = v;
      fill(slot + 1, used + v, typed + (is_typed ? v : 0));
    }
    slots_[slot] = 0;
  }

  int n_max_;
  EnumerationLimits limits_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> slots_;
  std::set<TwoLocusConfig> seen_;
};

}  // namespace

std::vector<TwoLocusConfig> enumerate_canonical_configs(int n_max, const EnumerationLimits& limits) {
  if (n_max < 1) throw ContractViolation("enumerate_canonical_configs: n_max must be positive");
  return Enumerator(n_max, limits).run();
}

}  // namespace twolocus
