#include <benchmark/benchmark.h>

#include "twolocus/allele_counts.hpp"
#include "twolocus/asymptotic.hpp"
#include "twolocus/two_locus.hpp"

using namespace twolocus;

namespace {

TwoLocusConfig typed_sample(int n) {
  // n gametes spread over a 2x2 table, no partially typed ones.
  const int d = n / 4;
  return TwoLocusConfig::from_matrix({0, 0}, {0, 0}, {{d + n % 4, d}, {d, d}});
}

template <Scalar S>
void golding_cold(benchmark::State& state) {
  const auto config = typed_sample(static_cast<int>(state.range(0)));
  const Params<S> params{from_int<S>(1), from_int<S>(1), from_int<S>(10)};
  for (auto _ : state) {
    GoldingSolver<S> solver(params);
    benchmark::DoNotOptimize(solver.probability(config));
    state.counters["states"] = static_cast<double>(solver.cached_states());
  }
}

template <Scalar S>
void second_order(benchmark::State& state) {
  const auto config = typed_sample(static_cast<int>(state.range(0)));
  const Params<S> params{from_int<S>(1), from_int<S>(1), from_int<S>(0)};
  for (auto _ : state) {
    SecondOrderSolver<S> solver(params);
    benchmark::DoNotOptimize(q2(config, solver));
  }
}

void sigma_only(benchmark::State& state) {
  const auto config = typed_sample(static_cast<int>(state.range(0)));
  const Params<Rational> params{Rational(1), Rational(1), Rational(0)};
  for (auto _ : state) benchmark::DoNotOptimize(sigma(config, params));
}

template <Scalar S>
void counts_cold(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const Params<S> params{from_int<S>(1), from_int<S>(1), from_int<S>(10)};
  for (auto _ : state) {
    CountSolver<S> solver(params);
    benchmark::DoNotOptimize(solver.probability({1, 1, c, 2, 2}));
  }
}

}  // namespace

BENCHMARK(golding_cold<double>)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(golding_cold<Rational>)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(second_order<double>)->DenseRange(4, 12, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(second_order<Rational>)->DenseRange(4, 12, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(sigma_only)->DenseRange(4, 12, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(counts_cold<double>)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(counts_cold<Rational>)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
