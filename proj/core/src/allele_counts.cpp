#include "twolocus/allele_counts.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "twolocus/errors.hpp"
#include "twolocus/one_locus.hpp"
#include "twolocus/sparse_system.hpp"

namespace twolocus {

std::string to_string(const CountConfig& q) {
  return "(" + std::to_string(q.a) + "," + std::to_string(q.b) + "," + std::to_string(q.c) + ";" +
         std::to_string(q.k) + "," + std::to_string(q.l) + ")";
}

bool is_structural_zero(const CountConfig& q) {
  if (q.a < 0 || q.b < 0 || q.c < 0 || q.k < 0 || q.l < 0) return true;
  if (q.sample_size() == 0 || (q.k == 0 && q.l == 0)) return true;
  const int na = q.a + q.c;
  const int nb = q.b + q.c;
  if (q.k > na || q.l > nb) return true;
  return (q.k == 0) != (na == 0) || (q.l == 0) != (nb == 0);
}

template <Scalar S>
S count_pmf_a(int n, int k, const Params<S>& params) {
  return allele_count_pmf<S>(n, k, params.theta_a);
}

template <Scalar S>
S count_pmf_b(int n, int l, const Params<S>& params) {
  return allele_count_pmf<S>(n, l, params.theta_b);
}

namespace {

struct CountTerm {
  RateFactor factor;
  long weight;
  CountConfig target;
  bool same_degree;
};

std::vector<CountTerm> count_terms(const CountConfig& q) {
  const long a = q.a;
  const long b = q.b;
  const long c = q.c;
  std::vector<CountTerm> terms;
  auto add = [&](RateFactor f, long w, CountConfig t, bool same) {
    if (w != 0 && !is_structural_zero(t)) terms.push_back({f, w, t, same});
  };
  add(RateFactor::unit, a * (a - 1 + 2 * c), {q.a - 1, q.b, q.c, q.k, q.l}, false);
  add(RateFactor::unit, b * (b - 1 + 2 * c), {q.a, q.b - 1, q.c, q.k, q.l}, false);
  add(RateFactor::unit, c * (c - 1), {q.a, q.b, q.c - 1, q.k, q.l}, false);
  add(RateFactor::unit, 2 * a * b, {q.a - 1, q.b - 1, q.c + 1, q.k, q.l}, true);
  add(RateFactor::theta_a, a, {q.a - 1, q.b, q.c, q.k - 1, q.l}, false);
  add(RateFactor::theta_a, c, {q.a, q.b + 1, q.c - 1, q.k - 1, q.l}, false);
  add(RateFactor::theta_b, b, {q.a, q.b - 1, q.c, q.k, q.l - 1}, false);
  add(RateFactor::theta_b, c, {q.a + 1, q.b, q.c - 1, q.k, q.l - 1}, false);
  add(RateFactor::rho, c, {q.a + 1, q.b + 1, q.c - 1, q.k, q.l}, true);
  return terms;
}

bool is_count_boundary(const CountConfig& q) { return q.sample_size() == 1 && q.c == 0; }

template <Scalar S>
S count_diagonal(const CountConfig& q, const Params<S>& params) {
  const long n = q.sample_size();
  return S(from_int<S>(n * (n - 1)) + params.theta_a * from_int<S>(q.a + q.c) +
           params.theta_b * from_int<S>(q.b + q.c) + params.rho * from_int<S>(q.c));
}

}  // namespace

template <Scalar S>
std::size_t CountSolver<S>::Hash::operator()(const CountConfig& q) const noexcept {
  std::size_t h = 0;
  for (int v : {q.a, q.b, q.c, q.k, q.l}) h = h * 1000003u + static_cast<std::size_t>(v);
  return h;
}

template <Scalar S>
CountSolver<S>::CountSolver(Params<S> params, SolverLimits limits) : params_(std::move(params)), limits_(limits) {
  params_.validate();
}

template <Scalar S>
void CountSolver<S>::solve_closure(const CountConfig& root) {
  std::unordered_map<CountConfig, std::vector<CountTerm>, Hash> pending;
  std::unordered_set<CountConfig, Hash> seen{root};
  std::deque<CountConfig> queue{root};
  while (!queue.empty()) {
    const CountConfig state = queue.front();
    queue.pop_front();
    if (is_count_boundary(state)) {
      // A lone gamete shows exactly its own allele.
      cache_.emplace(state, from_int<S>(1));
      continue;
    }
    std::vector<CountTerm> terms = count_terms(state);
    for (const auto& term : terms) {
      if (cache_.contains(term.target) || !seen.insert(term.target).second) continue;
      if (seen.size() > limits_.max_states) {
        throw CapabilityError("state budget exceeded: allele-count closure has more than " +
                              std::to_string(limits_.max_states) + " states");
      }
      queue.push_back(term.target);
    }
    pending.emplace(state, std::move(terms));
  }

  std::map<int, std::vector<CountConfig>> by_degree;
  for (const auto& [state, terms] : pending) by_degree[state.degree()].push_back(state);

  for (auto& [degree, states] : by_degree) {
    std::sort(states.begin(), states.end(), [](const CountConfig& x, const CountConfig& y) {
      return std::tuple(x.a + x.c, x.b + x.c, x.k, x.l, x.c) < std::tuple(y.a + y.c, y.b + y.c, y.k, y.l, y.c);
    });
    std::unordered_map<CountConfig, std::size_t, Hash> index;
    for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);

    SparseSystem<S> system(states.size());
    for (std::size_t row = 0; row < states.size(); ++row) {
      system.add(row, row, count_diagonal(states[row], params_));
      for (const auto& term : pending.at(states[row])) {
        const S coefficient = rate_coefficient(term.factor, term.weight, params_);
        if (coefficient == 0) continue;
        if (term.same_degree) {
          if (auto it = index.find(term.target); it != index.end()) {
            system.add(row, it->second, S(-coefficient));
            continue;
          }
        }
        auto it = cache_.find(term.target);
        if (it == cache_.end()) throw std::logic_error("count solver: unsolved dependency " + to_string(term.target));
        system.add_rhs(row, S(coefficient * it->second));
      }
    }
    std::vector<S> solution = std::move(system).solve();
    for (std::size_t i = 0; i < states.size(); ++i) cache_.emplace(states[i], std::move(solution[i]));
  }
}

template <Scalar S>
S CountSolver<S>::probability(const CountConfig& query) {
  if (query.a < 0 || query.b < 0 || query.c < 0) throw ContractViolation("negative gamete count");
  if (query.sample_size() < 1) throw ContractViolation("allele counts of an empty sample");
  if (is_structural_zero(query)) return from_int<S>(0);
  if (auto it = cache_.find(query); it != cache_.end()) return it->second;
  solve_closure(query);
  return cache_.at(query);
}

template <Scalar S>
S CountSolver<S>::residual(const CountConfig& query) {
  const S value = probability(query);
  if (is_structural_zero(query)) return value;
  if (is_count_boundary(query)) return S(value - from_int<S>(1));
  S rhs = from_int<S>(0);
  for (const auto& term : count_terms(query)) {
    rhs += rate_coefficient(term.factor, term.weight, params_) * probability(term.target);
  }
  return S(count_diagonal(query, params_) * value - rhs);
}

template <Scalar S>
S exact_count_pmf(const CountConfig& query, const Params<S>& params, SolverLimits limits) {
  return CountSolver<S>(params, limits).probability(query);
}

namespace {

template <Scalar S>
S marginal_or_zero(int n, int k, const S& theta) {
  if (n < 0 || k < 0) return from_int<S>(0);
  return allele_count_pmf<S>(n, k, theta);
}

}  // namespace

template <Scalar S>
S p0(const CountConfig& q, const Params<S>& params) {
  if (q.sample_size() < 1) throw ContractViolation("allele counts of an empty sample");
  return S(marginal_or_zero<S>(q.a + q.c, q.k, params.theta_a) * marginal_or_zero<S>(q.b + q.c, q.l, params.theta_b));
}

template <Scalar S>
S p1(const CountConfig& q, const Params<S>& params) {
  if (q.sample_size() < 1) throw ContractViolation("allele counts of an empty sample");
  if (q.c < 2) return from_int<S>(0);
  const S da = marginal_or_zero<S>(q.a + q.c, q.k, params.theta_a) -
               marginal_or_zero<S>(q.a + q.c - 1, q.k, params.theta_a);
  const S db = marginal_or_zero<S>(q.b + q.c, q.l, params.theta_b) -
               marginal_or_zero<S>(q.b + q.c - 1, q.l, params.theta_b);
  return S(from_int<S>(choose2(q.c)) * da * db);
}

template <Scalar S>
S count_pmf_asymptotic(const CountConfig& q, const Params<S>& params, ExpansionOrder order) {
  if (order == ExpansionOrder::second) throw ParameterError("allele-count expansion is available to order 1 only");
  if (!(params.theta_a > 0) || !(params.theta_b > 0)) throw ParameterError("mutation rates must be positive");
  S value = p0(q, params);
  if (order == ExpansionOrder::zeroth) return value;
  if (!(params.rho > 0)) throw ParameterError("expansion order 1 needs rho > 0");
  return S(value + p1(q, params) / params.rho);
}

#define TWOLOCUS_INSTANTIATE(S)                                                            \
  template S count_pmf_a<S>(int, int, const Params<S>&);                                   \
  template S count_pmf_b<S>(int, int, const Params<S>&);                                   \
  template class CountSolver<S>;                                                           \
  template S exact_count_pmf<S>(const CountConfig&, const Params<S>&, SolverLimits);       \
  template S p0<S>(const CountConfig&, const Params<S>&);                                  \
  template S p1<S>(const CountConfig&, const Params<S>&);                                  \
  template S count_pmf_asymptotic<S>(const CountConfig&, const Params<S>&, ExpansionOrder);

TWOLOCUS_INSTANTIATE(double)
TWOLOCUS_INSTANTIATE(Rational)

#undef TWOLOCUS_INSTANTIATE

}  // namespace twolocus
