#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "generators.hpp"
#include "twolocus/errors.hpp"
#include "twolocus/two_locus.hpp"

using namespace twolocus;
namespace tt = twolocus::testing;

namespace {

Rational r(const char* text) { return parse_rational(text); }

// Standalone Golding solver: no canonical forms, no shared code with the
// library beyond the configuration type. States keep their allele order; an
// allele that loses its last gamete is dropped. Each same-degree component is
// solved densely with Gauss-Jordan.
class DenseGolding {
 public:
  DenseGolding(Rational ta, Rational tb, Rational rho) : ta_(ta), tb_(tb), rho_(rho) {}

  Rational q(const TwoLocusConfig& state) {
    if (auto it = memo_.find(state); it != memo_.end()) return it->second;
    if (state.sample_size() == 1 && state.c_total() == 0) return memo_[state] = 1;

    // Same-degree component reachable from `state`.
    std::vector<TwoLocusConfig> block{state};
    std::map<TwoLocusConfig, std::size_t> index{{state, 0}};
    for (std::size_t k = 0; k < block.size(); ++k) {
      for (const auto& [w, target] : terms(block[k])) {
        if (target.degree() == state.degree() && !index.count(target)) {
          index.emplace(target, block.size());
          block.push_back(target);
        }
      }
    }
    const std::size_t n = block.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1, 0));
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = block[k];
      const long size = s.sample_size();
      m[k][k] = size * (size - 1) + ta_ * (s.a_total() + s.c_total()) + tb_ * (s.b_total() + s.c_total()) +
                rho_ * s.c_total();
      for (const auto& [w, target] : terms(s)) {
        if (target.degree() == s.degree()) {
          m[k][index.at(target)] -= w;
        } else {
          m[k][n] += w * q(target);
        }
      }
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (m[pivot][col] == 0) ++pivot;
      std::swap(m[pivot], m[col]);
      for (std::size_t row = 0; row < n; ++row) {
        if (row == col || m[row][col] == 0) continue;
        const Rational f = m[row][col] / m[col][col];
        for (std::size_t j = col; j <= n; ++j) m[row][j] -= f * m[col][j];
      }
    }
    for (std::size_t k = 0; k < n; ++k) memo_[block[k]] = m[k][n] / m[k][k];
    return memo_.at(state);
  }

 private:
  static TwoLocusConfig tidy(TwoLocusConfig s) {
    auto rows = s.c_row_sums();
    for (int i = s.num_a_alleles() - 1; i >= 0; --i) {
      if (s.a[i] + rows[i] == 0) s.remove_a_allele(i);
    }
    auto cols = s.c_col_sums();
    for (int j = s.num_b_alleles() - 1; j >= 0; --j) {
      if (s.b[j] + cols[j] == 0) s.remove_b_allele(j);
    }
    return s;
  }

  // (coefficient, target) pairs of the right-hand side.
  std::vector<std::pair<Rational, TwoLocusConfig>> terms(const TwoLocusConfig& s) const {
    std::vector<std::pair<Rational, TwoLocusConfig>> out;
    const int K = s.num_a_alleles();
    const int L = s.num_b_alleles();
    const auto ci = s.c_row_sums();
    const auto cj = s.c_col_sums();
    auto push = [&](Rational w, TwoLocusConfig t) {
      if (w != 0) out.emplace_back(w, tidy(std::move(t)));
    };
    for (int i = 0; i < K; ++i) {
      if (s.a[i] > 0) {
        auto t = s;
        --t.a[i];
        push(Rational(s.a[i] * (s.a[i] - 1 + 2 * ci[i])), t);
      }
      if (s.a[i] == 1 && ci[i] == 0) {
        auto t = s;
        --t.a[i];
        push(ta_, t);
      }
    }
    for (int j = 0; j < L; ++j) {
      if (s.b[j] > 0) {
        auto t = s;
        --t.b[j];
        push(Rational(s.b[j] * (s.b[j] - 1 + 2 * cj[j])), t);
      }
      if (s.b[j] == 1 && cj[j] == 0) {
        auto t = s;
        --t.b[j];
        push(tb_, t);
      }
    }
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < L; ++j) {
        const int x = s.cell(i, j);
        if (x >= 2) {
          auto t = s;
          --t.cell(i, j);
          push(Rational(x * (x - 1)), t);
        }
        if (s.a[i] > 0 && s.b[j] > 0) {
          auto t = s;
          --t.a[i];
          --t.b[j];
          ++t.cell(i, j);
          push(Rational(2 * s.a[i] * s.b[j]), t);
        }
        if (x > 0) {
          auto t = s;
          ++t.a[i];
          ++t.b[j];
          --t.cell(i, j);
          push(rho_ * x, t);
        }
        // A mutation on the last carrier of allele i leaves a B-only lineage.
        if (x == 1 && s.a[i] + ci[i] == 1) {
          auto t = s;
          --t.cell(i, j);
          ++t.b[j];
          push(ta_, t);
        }
        if (x == 1 && s.b[j] + cj[j] == 1) {
          auto t = s;
          --t.cell(i, j);
          ++t.a[i];
          push(tb_, t);
        }
      }
    }
    return out;
  }

  Rational ta_;
  Rational tb_;
  Rational rho_;
  std::map<TwoLocusConfig, Rational> memo_;
};

// Every one-gamete extension of `config`, by kind: A-only, B-only, typed.
std::vector<TwoLocusConfig> extensions(const TwoLocusConfig& config, char kind) {
  std::vector<TwoLocusConfig> out;
  const int K = config.num_a_alleles();
  const int L = config.num_b_alleles();
  if (kind == 'a') {
    for (int i = 0; i < K; ++i) {
      auto t = config;
      ++t.a[i];
      out.push_back(t);
    }
    auto t = config;
    t.add_a_allele(1);
    out.push_back(t);
  } else if (kind == 'b') {
    for (auto& t : extensions(config.transposed(), 'a')) out.push_back(t.transposed());
  } else {
    for (int i = 0; i <= K; ++i) {
      for (int j = 0; j <= L; ++j) {
        auto t = config;
        if (i == K) t.add_a_allele(0);
        if (j == L) t.add_b_allele(0);
        ++t.cell(i, j);
        out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("boundaries and the two-gamete example") {
  tt::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Params<Rational> p{Rational(tt::uniform(rng, 1, 9)) / 4, Rational(tt::uniform(rng, 1, 9)) / 3,
                             Rational(tt::uniform(rng, 0, 20)) / 7};
    GoldingSolver<Rational> solver(p);
    CHECK(solver.probability(TwoLocusConfig({1}, {}, {})) == 1);
    CHECK(solver.probability(TwoLocusConfig({}, {1}, {})) == 1);
    CHECK(solver.probability(TwoLocusConfig({1}, {1}, {0})) == 1);
    CHECK(solver.probability(TwoLocusConfig({0}, {0}, {1})) == 1);
  }
  CHECK(is_golding_boundary(TwoLocusConfig({1}, {}, {})));
  CHECK_FALSE(is_golding_boundary(TwoLocusConfig({0}, {0}, {1})));
  CHECK(exact_q(TwoLocusConfig({1}, {1}, {0}), Params<double>{1.0, 1.0, 5.0}) == doctest::Approx(1.0));
}

TEST_CASE("recursion terms of small configurations") {
  const auto typed = golding_neighbors(TwoLocusConfig({0}, {0}, {1}));
  REQUIRE(typed.same_degree.size() == 1);
  CHECK(typed.same_degree[0].factor == RateFactor::rho);
  CHECK(typed.same_degree[0].weight == 1);
  CHECK(typed.same_degree[0].target == TwoLocusConfig({1}, {1}, {0}));
  REQUIRE(typed.lower_degree.size() == 2);
  std::set<std::pair<int, TwoLocusConfig>> lower;
  for (const auto& t : typed.lower_degree) lower.emplace(static_cast<int>(t.factor), t.target);
  CHECK(lower.count({static_cast<int>(RateFactor::theta_a), TwoLocusConfig({}, {1}, {})}));
  CHECK(lower.count({static_cast<int>(RateFactor::theta_b), TwoLocusConfig({1}, {}, {})}));

  const auto split = golding_neighbors(TwoLocusConfig({1}, {1}, {0}));
  REQUIRE(split.same_degree.size() == 1);
  CHECK(split.same_degree[0].factor == RateFactor::unit);
  CHECK(split.same_degree[0].weight == 2);
  CHECK(split.same_degree[0].target == TwoLocusConfig({0}, {0}, {1}));
  CHECK(split.lower_degree.size() == 2);

  const Params<Rational> p{r("1/2"), r("3/2"), Rational(4)};
  const auto c = TwoLocusConfig::from_matrix({2, 0}, {1, 0}, {{1, 0}, {0, 1}});
  // n(n-1) + theta_A (a+c) + theta_B (b+c) + rho c with n = 5.
  CHECK(golding_diagonal(c, p) == 20 + r("1/2") * 4 + r("3/2") * 3 + 4 * 2);
  CHECK(rate_coefficient(RateFactor::theta_b, 3, p) == r("9/2"));
  CHECK(rate_coefficient(RateFactor::unit, 3, p) == 3);
}

TEST_CASE("library solver agrees with a standalone dense solver") {
  for (const auto& [ta, tb, rho] : {std::tuple{"1/2", "3/2", "5/2"}, std::tuple{"1", "1", "0"}, std::tuple{"3", "1/3", "40"}}) {
    DenseGolding dense(r(ta), r(tb), r(rho));
    GoldingSolver<Rational> solver({r(ta), r(tb), r(rho)});
    for (const auto& config : enumerate_canonical_configs(4, {})) CHECK(solver.probability(config) == dense.q(config));
  }
  tt::Rng rng(23);
  DenseGolding dense(r("2/3"), r("5/4"), r("7/2"));
  GoldingSolver<Rational> solver({r("2/3"), r("5/4"), r("7/2")});
  for (int trial = 0; trial < 15; ++trial) {
    const auto config = tt::random_config(rng, 5, 3, 2);
    CHECK(solver.probability(config) == dense.q(config));
  }
}

TEST_CASE("relabeling and locus swap leave q unchanged") {
  tt::Rng rng(29);
  const Params<Rational> p{r("1/3"), r("2"), r("3/2")};
  for (int trial = 0; trial < 40; ++trial) {
    const auto config = tt::random_config(rng, 5, 3, 3);
    GoldingSolver<Rational> a(p);
    GoldingSolver<Rational> b(p);
    GoldingSolver<Rational> swapped(p.swapped());
    const Rational value = a.probability(config);
    const auto permuted = tt::relabel(config, tt::random_permutation(rng, config.num_a_alleles()),
                                      tt::random_permutation(rng, config.num_b_alleles()));
    CHECK(b.probability(permuted) == value);
    CHECK(swapped.probability(config.transposed()) == value);
  }
}

TEST_CASE("sampling consistency") {
  tt::Rng rng(31);
  const Params<Rational> p{r("1/2"), r("3/2"), r("5/2")};
  GoldingSolver<Rational> solver(p);
  for (int trial = 0; trial < 30; ++trial) {
    const auto config = tt::random_config(rng, 5);
    const Rational value = solver.probability(config);
    for (char kind : {'a', 'b', 'c'}) {
      Rational total = 0;
      for (const auto& t : extensions(config, kind)) total += solver.probability(t);
      CHECK(total == value);
    }
  }
}

TEST_CASE("recursion residual is exactly zero") {
  const Params<Rational> p{r("3/4"), r("5/3"), r("9/2")};
  GoldingSolver<Rational> solver(p);
  for (const auto& config : enumerate_canonical_configs(5, {})) CHECK(solver.residual(config) == 0);
  tt::Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const auto config = tt::random_config(rng, 6, 3, 3);
    CHECK(solver.residual(config) == 0);
  }
}

TEST_CASE("assembled systems are strictly diagonally dominant") {
  const Params<Rational> p{r("1/10"), r("1/10"), Rational(1000)};
  GoldingSolver<Rational> solver(p);
  std::size_t rows = 0;
  solver.set_system_observer([&](const DegreeSystem<Rational>& block) {
    CHECK(block.system.size() == block.states.size());
    for (std::size_t i = 0; i < block.system.size(); ++i) {
      Rational off = 0;
      Rational diag = 0;
      for (const auto& [col, v] : block.system.row(i)) {
        if (col == i) {
          diag = v;
        } else {
          off += abs(v);
        }
      }
      CHECK(abs(diag) > off);
      ++rows;
    }
  });
  solver.probability(TwoLocusConfig::from_matrix({1, 1}, {2, 0}, {{1, 1}, {0, 2}}));
  CHECK(rows > 0);
}

TEST_CASE("float backend tracks the rational one") {
  const Params<Rational> exact{r("1/2"), r("3/2"), r("10")};
  GoldingSolver<Rational> a(exact);
  GoldingSolver<double> b(convert_params<double>(exact));
  for (const auto& config : enumerate_canonical_configs(6, {})) {
    CHECK(b.probability(config) == doctest::Approx(a.probability(config).get_d()).epsilon(1e-11));
  }
}

TEST_CASE("rho = 0 and parameter errors") {
  CHECK_NOTHROW(exact_q(TwoLocusConfig({0}, {0}, {2}), Params<Rational>{Rational(1), Rational(1), Rational(0)}));
  CHECK_THROWS_AS(GoldingSolver<Rational>({Rational(0), Rational(1), Rational(1)}), ParameterError);
  CHECK_THROWS_AS(GoldingSolver<double>({1.0, -1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(GoldingSolver<double>({1.0, 1.0, -1.0}), ParameterError);
  TwoLocusConfig bad;
  bad.a = {1};
  bad.b = {1};
  bad.c = {0, 0};
  CHECK_THROWS_AS(exact_q(bad, Params<double>{1.0, 1.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(exact_q(TwoLocusConfig{}, Params<double>{1.0, 1.0, 1.0}), ContractViolation);
}

TEST_CASE("state budget") {
  SolverLimits limits;
  limits.max_states = 20;
  GoldingSolver<double> solver({1.0, 1.0, 1.0}, limits);
  const auto big = TwoLocusConfig::from_matrix({0, 0}, {0, 0}, {{2, 1}, {1, 2}});
  CHECK_THROWS_AS(solver.probability(big), CapabilityError);
  CHECK(solver.probability(TwoLocusConfig({2}, {}, {})) == doctest::Approx(0.5));
  limits.max_states = 100000;
  GoldingSolver<double> roomy({1.0, 1.0, 1.0}, limits);
  CHECK(roomy.probability(big) > 0);
  CHECK(roomy.cached_states() > 20);
}
