#include "twolocus/two_locus.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <tuple>
#include <unordered_set>

#include "twolocus/errors.hpp"

namespace twolocus {

template <Scalar S>
void Params<S>::validate() const {
  if (!(theta_a > 0)) throw ParameterError("theta_A must be positive");
  if (!(theta_b > 0)) throw ParameterError("theta_B must be positive");
  if (!(rho >= 0)) throw ParameterError("rho must be nonnegative");
  if constexpr (std::same_as<S, double>) {
    if (!std::isfinite(rho) || !std::isfinite(theta_a) || !std::isfinite(theta_b)) {
      throw ParameterError("rates must be finite");
    }
  }
}

GoldingNeighbors golding_neighbors(const TwoLocusConfig& config) {
  GoldingNeighbors out;
  const int rows = config.num_a_alleles();
  const int cols = config.num_b_alleles();
  const auto row_sums = config.c_row_sums();
  const auto col_sums = config.c_col_sums();

  auto lower = [&](RateFactor factor, long weight, TwoLocusConfig target) {
    out.lower_degree.push_back({factor, weight, std::move(target)});
  };
  auto same = [&](RateFactor factor, long weight, TwoLocusConfig target) {
    out.same_degree.push_back({factor, weight, std::move(target)});
  };

  // Coalescence of an A-only lineage with an A-only or typed lineage.
  for (int i = 0; i < rows; ++i) {
    const long weight = static_cast<long>(config.a[i]) * (config.a[i] - 1 + 2 * row_sums[i]);
    if (weight > 0) {
      TwoLocusConfig target = config;
      --target.a[i];
      lower(RateFactor::unit, weight, std::move(target));
    }
  }
  for (int j = 0; j < cols; ++j) {
    const long weight = static_cast<long>(config.b[j]) * (config.b[j] - 1 + 2 * col_sums[j]);
    if (weight > 0) {
      TwoLocusConfig target = config;
      --target.b[j];
      lower(RateFactor::unit, weight, std::move(target));
    }
  }

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int cij = config.cell(i, j);
      // Typed-typed coalescence.
      if (cij >= 2) {
        TwoLocusConfig target = config;
        --target.cell(i, j);
        lower(RateFactor::unit, static_cast<long>(cij) * (cij - 1), std::move(target));
      }
      // A-only with B-only coalescence: same degree.
      if (config.a[i] > 0 && config.b[j] > 0) {
        TwoLocusConfig target = config;
        --target.a[i];
        --target.b[j];
        ++target.cell(i, j);
        same(RateFactor::unit, 2L * config.a[i] * config.b[j], std::move(target));
      }
      // Recombination: same degree.
      if (cij > 0) {
        TwoLocusConfig target = config;
        ++target.a[i];
        ++target.b[j];
        --target.cell(i, j);
        same(RateFactor::rho, cij, std::move(target));
      }
    }
  }

  // Mutation at A on the only gamete carrying allele i.
  for (int i = 0; i < rows; ++i) {
    if (config.a[i] + row_sums[i] != 1) continue;
    if (config.a[i] == 1) {
      TwoLocusConfig target = config;
      target.remove_a_allele(i);
      lower(RateFactor::theta_a, 1, std::move(target));
    } else {
      for (int j = 0; j < cols; ++j) {
        if (config.cell(i, j) != 1) continue;
        TwoLocusConfig target = config;
        ++target.b[j];
        target.remove_a_allele(i);
        lower(RateFactor::theta_a, 1, std::move(target));
      }
    }
  }
  for (int j = 0; j < cols; ++j) {
    if (config.b[j] + col_sums[j] != 1) continue;
    if (config.b[j] == 1) {
      TwoLocusConfig target = config;
      target.remove_b_allele(j);
      lower(RateFactor::theta_b, 1, std::move(target));
    } else {
      for (int i = 0; i < rows; ++i) {
        if (config.cell(i, j) != 1) continue;
        TwoLocusConfig target = config;
        ++target.a[i];
        target.remove_b_allele(j);
        lower(RateFactor::theta_b, 1, std::move(target));
      }
    }
  }
  return out;
}

template <Scalar S>
S rate_coefficient(RateFactor factor, long weight, const Params<S>& params) {
  const S w = from_int<S>(weight);
  switch (factor) {
    case RateFactor::unit:
      return w;
    case RateFactor::theta_a:
      return S(w * params.theta_a);
    case RateFactor::theta_b:
      return S(w * params.theta_b);
    case RateFactor::rho:
      return S(w * params.rho);
  }
  return w;
}

template <Scalar S>
S golding_diagonal(const TwoLocusConfig& config, const Params<S>& params) {
  const long a = config.a_total();
  const long b = config.b_total();
  const long c = config.c_total();
  const long n = a + b + c;
  return S(from_int<S>(n * (n - 1)) + params.theta_a * from_int<S>(a + c) + params.theta_b * from_int<S>(b + c) +
           params.rho * from_int<S>(c));
}

bool is_golding_boundary(const TwoLocusConfig& config) {
  return config.sample_size() == 1 && config.c_total() == 0;
}

template <Scalar S>
GoldingSolver<S>::GoldingSolver(Params<S> params, SolverLimits limits)
    : params_(std::move(params)), limits_(limits) {
  params_.validate();
}

template <Scalar S>
const S& GoldingSolver<S>::cached(const TwoLocusConfig& canonical_state) const {
  auto it = cache_.find(canonical_state);
  if (it == cache_.end()) {
    throw std::logic_error("golding solver: state " + to_json_string(canonical_state) + " used before it was solved");
  }
  return it->second;
}

namespace {

struct CanonicalTerm {
  RateFactor factor;
  long weight;
  TwoLocusConfig target;
  bool same_degree;
};

// Within one degree, states sharing the one-locus marginals form the coupled
// blocks; ordering by (marginals, c) keeps each block contiguous and banded.
auto block_order_key(const TwoLocusConfig& config) {
  auto am = config.a_marginal();
  auto bm = config.b_marginal();
  std::sort(am.begin(), am.end());
  std::sort(bm.begin(), bm.end());
  return std::make_tuple(std::move(am), std::move(bm), config.c_total());
}

}  // namespace

template <Scalar S>
void GoldingSolver<S>::solve_closure(const TwoLocusConfig& root) {
  std::unordered_map<TwoLocusConfig, std::vector<CanonicalTerm>, ConfigHash> pending;
  std::deque<TwoLocusConfig> queue{root};
  std::unordered_set<TwoLocusConfig, ConfigHash> seen{root};

  while (!queue.empty()) {
    TwoLocusConfig state = std::move(queue.front());
    queue.pop_front();
    if (is_golding_boundary(state)) {
      cache_.emplace(state, from_int<S>(1));
      continue;
    }
    const GoldingNeighbors neighbors = golding_neighbors(state);
    std::vector<CanonicalTerm> terms;
    terms.reserve(neighbors.same_degree.size() + neighbors.lower_degree.size());
    auto visit = [&](const GoldingTerm& term, bool same_degree) {
      TwoLocusConfig target = canonical(term.target, limits_.max_alleles);
      if (!cache_.contains(target) && seen.insert(target).second) {
        if (seen.size() > limits_.max_states) {
          throw CapabilityError("state budget exceeded: closure has more than " +
                                std::to_string(limits_.max_states) + " states (" + std::to_string(seen.size()) +
                                " discovered so far)");
        }
        queue.push_back(target);
      }
      terms.push_back({term.factor, term.weight, std::move(target), same_degree});
    };
    for (const auto& term : neighbors.same_degree) visit(term, true);
    for (const auto& term : neighbors.lower_degree) visit(term, false);
    pending.emplace(std::move(state), std::move(terms));
  }

  std::map<int, std::vector<TwoLocusConfig>> by_degree;
  for (const auto& [state, terms] : pending) by_degree[state.degree()].push_back(state);

  for (auto& [degree, states] : by_degree) {
    std::sort(states.begin(), states.end(), [](const TwoLocusConfig& x, const TwoLocusConfig& y) {
      auto kx = block_order_key(x);
      auto ky = block_order_key(y);
      if (kx != ky) return kx < ky;
      return x < y;
    });
    std::unordered_map<TwoLocusConfig, std::size_t, ConfigHash> index;
    for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);

    DegreeSystem<S> block;
    block.degree = degree;
    block.system = SparseSystem<S>(states.size());
    for (std::size_t row = 0; row < states.size(); ++row) {
      block.system.add(row, row, golding_diagonal(states[row], params_));
      for (const auto& term : pending.at(states[row])) {
        const S coefficient = rate_coefficient(term.factor, term.weight, params_);
        if (coefficient == 0) continue;
        if (term.same_degree) {
          if (auto it = index.find(term.target); it != index.end()) {
            block.system.add(row, it->second, S(-coefficient));
            continue;
          }
        }
        block.system.add_rhs(row, S(coefficient * cached(term.target)));
      }
    }
    block.states = std::move(states);
    if (observer_) observer_(block);

    std::vector<S> solution = std::move(block.system).solve();
    for (std::size_t i = 0; i < block.states.size(); ++i) {
      cache_.emplace(std::move(block.states[i]), std::move(solution[i]));
    }
  }
}

template <Scalar S>
S GoldingSolver<S>::probability(const TwoLocusConfig& config) {
  validate(config);
  if (config.sample_size() < 1) throw ContractViolation("probability of an empty configuration");
  TwoLocusConfig key = canonical(config, limits_.max_alleles);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  solve_closure(key);
  return cached(key);
}

template <Scalar S>
S GoldingSolver<S>::residual(const TwoLocusConfig& config) {
  const S value = probability(config);
  if (is_golding_boundary(config)) return S(value - from_int<S>(1));
  S rhs = from_int<S>(0);
  const GoldingNeighbors neighbors = golding_neighbors(config);
  for (const auto* group : {&neighbors.same_degree, &neighbors.lower_degree}) {
    for (const auto& term : *group) {
      rhs += rate_coefficient(term.factor, term.weight, params_) * probability(term.target);
    }
  }
  return S(golding_diagonal(config, params_) * value - rhs);
}

template <Scalar S>
S exact_q(const TwoLocusConfig& config, const Params<S>& params, SolverLimits limits) {
  return GoldingSolver<S>(params, limits).probability(config);
}

#define TWOLOCUS_INSTANTIATE(S)                                                          \
  template struct Params<S>;                                                             \
  template S rate_coefficient<S>(RateFactor, long, const Params<S>&);                    \
  template S golding_diagonal<S>(const TwoLocusConfig&, const Params<S>&);               \
  template class GoldingSolver<S>;                                                       \
  template S exact_q<S>(const TwoLocusConfig&, const Params<S>&, SolverLimits);

TWOLOCUS_INSTANTIATE(double)
TWOLOCUS_INSTANTIATE(Rational)

#undef TWOLOCUS_INSTANTIATE

}  // namespace twolocus
