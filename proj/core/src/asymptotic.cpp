#include "twolocus/asymptotic.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "twolocus/errors.hpp"
#include "twolocus/one_locus.hpp"

namespace twolocus {

ExpansionOrder expansion_order(int order) {
  if (order < 0 || order > 2) throw ParameterError("expansion order must be 0, 1 or 2");
  return static_cast<ExpansionOrder>(order);
}

template <Scalar S>
MarginalProbabilities<S>::MarginalProbabilities(const TwoLocusConfig& config, const Params<S>& params)
    : rows_(config.num_a_alleles()), cols_(config.num_b_alleles()) {
  const std::vector<int> ma = config.a_marginal();
  const std::vector<int> mb = config.b_marginal();

  auto table = [](const std::vector<int>& m, const S& theta, S& whole, std::vector<S>& single,
                  std::vector<S>& pair) {
    const int size = static_cast<int>(m.size());
    whole = esf_ordered_or_zero<S>(m, theta);
    single.assign(static_cast<std::size_t>(size), from_int<S>(0));
    pair.assign(static_cast<std::size_t>(size) * size, from_int<S>(0));
    std::vector<int> reduced = m;
    for (int i = 0; i < size; ++i) {
      --reduced[i];
      single[i] = esf_ordered_or_zero<S>(reduced, theta);
      for (int k = 0; k < size; ++k) {
        --reduced[k];
        pair[static_cast<std::size_t>(i) * size + k] = esf_ordered_or_zero<S>(reduced, theta);
        ++reduced[k];
      }
      ++reduced[i];
    }
  };
  table(ma, params.theta_a, qa_, qa_i_, qa_ik_);
  table(mb, params.theta_b, qb_, qb_j_, qb_jl_);
}

template <Scalar S>
S q0(const TwoLocusConfig& config, const Params<S>& params) {
  validate(config);
  return S(esf_ordered_or_zero<S>(config.a_marginal(), params.theta_a) *
           esf_ordered_or_zero<S>(config.b_marginal(), params.theta_b));
}

template <Scalar S>
S q1(const TwoLocusConfig& config, const Params<S>& params) {
  validate(config);
  const int c = config.c_total();
  if (c < 2) return from_int<S>(0);
  const MarginalProbabilities<S> q(config, params);
  const auto rows = config.c_row_sums();
  const auto cols = config.c_col_sums();
  auto k = [](long v) { return from_int<S>(v); };

  S value = k(choose2(c)) * q.a() * q.b();
  for (int i = 0; i < config.num_a_alleles(); ++i) value -= k(choose2(rows[i])) * q.a(i) * q.b();
  for (int j = 0; j < config.num_b_alleles(); ++j) value -= k(choose2(cols[j])) * q.a() * q.b(j);
  for (int i = 0; i < config.num_a_alleles(); ++i) {
    for (int j = 0; j < config.num_b_alleles(); ++j) {
      value += k(choose2(config.cell(i, j))) * q.a(i) * q.b(j);
    }
  }
  return value;
}

namespace {

constexpr std::array<std::string_view, kSigmaTermCount> kSigmaTermNames = {
    "QA.QB",
    "theta_A singleton QA_i.QB",
    "theta_B singleton QA.QB_j",
    "QA_i.QB",
    "QA_ii.QB",
    "QA.QB_j",
    "QA.QB_jj",
    "QA_ik.QB",
    "QA.QB_jl",
    "c_ij pairs QA_i.QB_j",
    "mixed QA_i.QB_j",
    "QA_ii.QB_j",
    "QA_i.QB_jj",
    "QA_ik.QB_j",
    "QA_i.QB_jl",
    "QA_ik.QB_jl",
    "QA_ii.QB_jj",
};

}  // namespace

std::string_view sigma_term_name(std::size_t index) { return kSigmaTermNames.at(index); }

template <Scalar S>
S SigmaBreakdown<S>::total() const {
  S sum = from_int<S>(0);
  for (const auto& term : terms) sum += term;
  return sum;
}

template <Scalar S>
SigmaBreakdown<S> sigma_terms(const TwoLocusConfig& config, const Params<S>& params, SigmaVariant variant) {
  validate(config);
  SigmaBreakdown<S> out;
  out.terms.fill(from_int<S>(0));
  const long c = config.c_total();
  if (c == 0) return out;

  const MarginalProbabilities<S> Q(config, params);
  const int K = config.num_a_alleles();
  const int L = config.num_b_alleles();
  const long a = config.a_total();
  const long b = config.b_total();
  const auto ci = config.c_row_sums();
  const auto cj = config.c_col_sums();
  const S& tA = params.theta_a;
  const S& tB = params.theta_b;
  auto k = [](long v) { return from_int<S>(v); };
  auto delta = [](long x, long y) { return x == y ? 1L : 0L; };
  auto ff = [](long x) { return x * (x - 1); };  // x(x-1)
  auto cij = [&](int i, int j) { return static_cast<long>(config.cell(i, j)); };
  auto ai = [&](int i) { return static_cast<long>(config.a[i]); };
  auto bj = [&](int j) { return static_cast<long>(config.b[j]); };
  auto& t = out.terms;
  const bool printed = variant == SigmaVariant::as_printed;
  // Indicator for the theta corrections attached to Q_ii^A and Q_jj^B.
  auto empties_a = [&](int i) { return delta(printed ? ci[i] : ai(i) + ci[i], 2); };
  auto empties_b = [&](int j) { return delta(printed ? cj[j] : bj(j) + cj[j], 2); };

  // (c/3) [ (c-1)(c+1)(3c-2)/8 + (c-1)(3a+3b+2c-1) + 6ab ] Q^A Q^B
  t[0] = k(c) / k(3) *
         (k((c - 1) * (c + 1) * (3 * c - 2)) / k(8) + k((c - 1) * (3 * a + 3 * b + 2 * c - 1)) + k(6 * a * b)) *
         Q.a() * Q.b();

  // -theta_A (c-1)/2 sum_i delta(a_i,0) delta(c_i.,1) Q^A_i Q^B
  for (int i = 0; i < K; ++i) {
    t[1] -= tA * k((c - 1) * delta(ai(i), 0) * delta(ci[i], 1)) / k(2) * Q.a(i) * Q.b();
  }
  // -theta_B (c-1)/2 sum_j delta(b_j,0) delta(c_.j,1) Q^A Q^B_j
  for (int j = 0; j < L; ++j) {
    t[2] -= tB * k((c - 1) * delta(bj(j), 0) * delta(cj[j], 1)) / k(2) * Q.a() * Q.b(j);
  }

  // sum_i [ (theta_A - c(c-3) + 2a + 4b - 4)/4 c_i.(c_i.-1) - (2b+c-1) c_i.(a_i+c_i.-1) ] Q^A_i Q^B
  for (int i = 0; i < K; ++i) {
    S bracket = (tA + k(-c * (c - 3) + 2 * a + 4 * b - 4)) / k(4) * k(ff(ci[i])) -
                k((2 * b + c - 1) * ci[i] * (ai(i) + ci[i] - 1));
    t[3] += bracket * Q.a(i) * Q.b();
  }
  // 1/2 sum_i [ theta_A/2 delta(a_i+c_i.,2) + (5 - 6a_i - 4c_i.)/6 ] c_i.(c_i.-1) Q^A_ii Q^B
  for (int i = 0; i < K; ++i) {
    S bracket = tA / k(2) * k(empties_a(i)) + k(5 - 6 * ai(i) - 4 * ci[i]) / k(6);
    t[4] += bracket * k(ff(ci[i])) / k(2) * Q.a(i, i) * Q.b();
  }

  // sum_j [ (theta_B - c(c-3) + 2b + 4a - 4)/4 c_.j(c_.j-1) - (2a+c-1) c_.j(b_j+c_.j-1) ] Q^A Q^B_j
  for (int j = 0; j < L; ++j) {
    S bracket = (tB + k(-c * (c - 3) + 2 * b + 4 * a - 4)) / k(4) * k(ff(cj[j])) -
                k((2 * a + c - 1) * cj[j] * (bj(j) + cj[j] - 1));
    t[5] += bracket * Q.a() * Q.b(j);
  }
  // 1/2 sum_j [ theta_B/2 delta(b_j+c_.j,2) + (5 - 6b_j - 4c_.j)/6 ] c_.j(c_.j-1) Q^A Q^B_jj
  for (int j = 0; j < L; ++j) {
    S bracket = tB / k(2) * k(empties_b(j)) + k(5 - 6 * bj(j) - 4 * cj[j]) / k(6);
    t[6] += bracket * k(ff(cj[j])) / k(2) * Q.a() * Q.b(j, j);
  }

  // sum_{i,k} c_i.(c_i.-1) c_k.(c_k.-1)/8 Q^A_ik Q^B
  for (int i = 0; i < K; ++i) {
    for (int kk = 0; kk < K; ++kk) t[7] += k(ff(ci[i]) * ff(ci[kk])) / k(8) * Q.a(i, kk) * Q.b();
  }
  // sum_{j,l} c_.j(c_.j-1) c_.l(c_.l-1)/8 Q^A Q^B_jl
  for (int j = 0; j < L; ++j) {
    for (int l = 0; l < L; ++l) t[8] += k(ff(cj[j]) * ff(cj[l])) / k(8) * Q.a() * Q.b(j, l);
  }

  // -(theta_A + theta_B - c(c-5) + 2a + 2b - 4)/4 sum_ij c_ij(c_ij-1) Q^A_i Q^B_j
  {
    S prefactor = (tA + tB + k(-c * (c - 5) + 2 * a + 2 * b - 4)) / k(4);
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < L; ++j) t[9] -= prefactor * k(ff(cij(i, j))) * Q.a(i) * Q.b(j);
    }
  }

  // sum_ij [ c_i.(c_i.-1)c_.j(c_.j-1)/4 + c_ij(c_ij+1-2c_i.+2c_i.c_.j-2c_.j)/2 + c_ij b_j(c_i.-1)
  //          + c_ij a_i(c_.j-1) + 2 a_i b_j c_ij
  //          + theta_B/2 delta(b_j,0)delta(c_.j,1)delta(c_ij,1)(c_i.-1)
  //          + theta_A/2 delta(a_i,0)delta(c_i.,1)delta(c_ij,1)(c_.j-1) ] Q^A_i Q^B_j
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      const long x = cij(i, j);
      S bracket = k(ff(ci[i]) * ff(cj[j])) / k(4) + k(x * (x + 1 - 2 * ci[i] + 2 * ci[i] * cj[j] - 2 * cj[j])) / k(2) +
                  k(x * bj(j) * (ci[i] - 1) + x * ai(i) * (cj[j] - 1) + 2 * ai(i) * bj(j) * x) +
                  tB / k(2) * k(delta(bj(j), 0) * delta(cj[j], 1) * delta(x, 1) * (ci[i] - 1)) +
                  tA / k(2) * k(delta(ai(i), 0) * delta(ci[i], 1) * delta(x, 1) * (cj[j] - 1));
      t[10] += bracket * Q.a(i) * Q.b(j);
    }
  }

  // 1/2 sum_i [ a_i + c_i. - 1 - theta_A/2 delta(a_i+c_i.,2) ] sum_j c_ij(c_ij-1) Q^A_ii Q^B_j
  for (int i = 0; i < K; ++i) {
    S bracket = k(ai(i) + ci[i] - 1) - tA / k(2) * k(empties_a(i));
    for (int j = 0; j < L; ++j) t[11] += bracket / k(2) * k(ff(cij(i, j))) * Q.a(i, i) * Q.b(j);
  }
  // 1/2 sum_j [ b_j + c_.j - 1 - theta_B/2 delta(b_j+c_.j,2) ] sum_i c_ij(c_ij-1) Q^A_i Q^B_jj
  for (int j = 0; j < L; ++j) {
    S bracket = k(bj(j) + cj[j] - 1) - tB / k(2) * k(empties_b(j));
    for (int i = 0; i < K; ++i) t[12] += bracket / k(2) * k(ff(cij(i, j))) * Q.a(i) * Q.b(j, j);
  }

  // -1/4 sum_{i,j,k} c_ij(c_ij-1) c_k.(c_k.-1) Q^A_ik Q^B_j
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      for (int kk = 0; kk < K; ++kk) t[13] -= k(ff(cij(i, j)) * ff(ci[kk])) / k(4) * Q.a(i, kk) * Q.b(j);
    }
  }
  // -1/4 sum_{i,j,l} c_ij(c_ij-1) c_.l(c_.l-1) Q^A_i Q^B_jl
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      for (int l = 0; l < L; ++l) t[14] -= k(ff(cij(i, j)) * ff(cj[l])) / k(4) * Q.a(i) * Q.b(j, l);
    }
  }
  // 1/8 sum_{i,j,k,l} c_ij(c_ij-1) c_kl(c_kl-1) Q^A_ik Q^B_jl
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      if (cij(i, j) < 2) continue;
      for (int kk = 0; kk < K; ++kk) {
        for (int l = 0; l < L; ++l) {
          t[15] += k(ff(cij(i, j)) * ff(cij(kk, l))) / k(8) * Q.a(i, kk) * Q.b(j, l);
        }
      }
    }
  }
  // -1/12 sum_ij c_ij(c_ij-1)(2c_ij-1) Q^A_ii Q^B_jj
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      t[16] -= k(ff(cij(i, j)) * (2 * cij(i, j) - 1)) / k(12) * Q.a(i, i) * Q.b(j, j);
    }
  }
  return out;
}

template <Scalar S>
S sigma(const TwoLocusConfig& config, const Params<S>& params, SigmaVariant variant) {
  return sigma_terms(config, params, variant).total();
}

template <Scalar S>
SecondOrderSolver<S>::SecondOrderSolver(Params<S> params) : params_(std::move(params)) {}

template <Scalar S>
std::size_t SecondOrderSolver<S>::KeyHash::operator()(const Key& key) const noexcept {
  std::size_t h = key.a.size();
  for (int v : key.a) h = h * 131 + static_cast<std::size_t>(v);
  h = h * 1000003 + key.b.size();
  for (int v : key.b) h = h * 131 + static_cast<std::size_t>(v);
  return h;
}

template <Scalar S>
S SecondOrderSolver<S>::value(std::vector<int> a_counts, std::vector<int> b_counts) {
  auto tidy = [](std::vector<int>& v) {
    if (std::any_of(v.begin(), v.end(), [](int x) { return x < 0; })) return false;
    std::erase(v, 0);
    std::sort(v.begin(), v.end(), std::greater<>());
    return true;
  };
  if (!tidy(a_counts) || !tidy(b_counts)) return from_int<S>(0);
  const long a = std::accumulate(a_counts.begin(), a_counts.end(), 0L);
  const long b = std::accumulate(b_counts.begin(), b_counts.end(), 0L);
  if (a + b <= 1) return from_int<S>(0);

  Key key{a_counts, b_counts};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const S& tA = params_.theta_a;
  const S& tB = params_.theta_b;
  auto k = [](long v) { return from_int<S>(v); };

  S rhs = from_int<S>(0);
  long a_singletons = 0;
  long b_singletons = 0;
  for (std::size_t i = 0; i < a_counts.size(); ++i) {
    const long ai = a_counts[i];
    std::vector<int> reduced = a_counts;
    --reduced[i];
    if (ai >= 2) rhs += k(ai * (ai - 1)) * value(reduced, b_counts);
    if (ai == 1) {
      ++a_singletons;
      rhs += tA * value(reduced, b_counts);
    }
  }
  for (std::size_t j = 0; j < b_counts.size(); ++j) {
    const long bj = b_counts[j];
    std::vector<int> reduced = b_counts;
    --reduced[j];
    if (bj >= 2) rhs += k(bj * (bj - 1)) * value(a_counts, reduced);
    if (bj == 1) {
      ++b_singletons;
      rhs += tB * value(a_counts, reduced);
    }
  }
  S source_a = k(a) * tA - (tA + k(a - 1)) * k(a_singletons);
  S source_b = k(b) * tB - (tB + k(b - 1)) * k(b_singletons);
  rhs += k(4) * source_a * source_b * esf_ordered_or_zero<S>(a_counts, tA) * esf_ordered_or_zero<S>(b_counts, tB);

  S diagonal = k(a) * (k(a - 1) + tA) + k(b) * (k(b - 1) + tB);
  S result = rhs / diagonal;
  memo_.emplace(std::move(key), result);
  return result;
}

template <Scalar S>
S q2_ab0(std::vector<int> a_counts, std::vector<int> b_counts, const Params<S>& params) {
  return SecondOrderSolver<S>(params).value(std::move(a_counts), std::move(b_counts));
}

template <Scalar S>
S q2(const TwoLocusConfig& config, SecondOrderSolver<S>& solver) {
  return S(solver.value(config.a_marginal(), config.b_marginal()) + sigma(config, solver.params()));
}

template <Scalar S>
S q2(const TwoLocusConfig& config, const Params<S>& params) {
  SecondOrderSolver<S> solver(params);
  return q2(config, solver);
}

template <Scalar S>
S q_asymptotic(const TwoLocusConfig& config, const Params<S>& params, ExpansionOrder order) {
  if (!(params.theta_a > 0) || !(params.theta_b > 0)) throw ParameterError("mutation rates must be positive");
  S value = q0(config, params);
  if (order == ExpansionOrder::zeroth) return value;
  if (!(params.rho > 0)) throw ParameterError("expansion orders above 0 need rho > 0");
  value += q1(config, params) / params.rho;
  if (order == ExpansionOrder::first) return value;
  value += q2(config, params) / (params.rho * params.rho);
  return value;
}

namespace {

// Visits every entrywise sub-matrix x <= c, passing the subsample.
void for_each_subsample(const std::vector<int>& cells, std::vector<int>& current, std::size_t index,
                        const std::function<void(const std::vector<int>&)>& visit) {
  if (index == cells.size()) {
    visit(current);
    return;
  }
  for (int v = 0; v <= cells[index]; ++v) {
    current[index] = v;
    for_each_subsample(cells, current, index + 1, visit);
  }
  current[index] = 0;
}

}  // namespace

template <Scalar S>
S q1_subsampling_oracle(const TwoLocusConfig& config, const Params<S>& params, int max_typed) {
  validate(config);
  const int c = config.c_total();
  if (c > max_typed) {
    throw CapabilityError("subsampling oracle limited to c <= " + std::to_string(max_typed));
  }
  const MarginalProbabilities<S> Q(config, params);
  const int K = config.num_a_alleles();
  const int L = config.num_b_alleles();
  auto k = [](long v) { return from_int<S>(v); };

  S total = from_int<S>(0);
  std::vector<int> current(config.c.size(), 0);
  for_each_subsample(config.c, current, 0, [&](const std::vector<int>& x) {
    const long m = std::accumulate(x.begin(), x.end(), 0L);
    if (m == 0) return;
    // P(C^(m) = x) = prod C(c_ij, x_ij) / C(c, m)
    BigInt weight_num = 1;
    for (std::size_t s = 0; s < x.size(); ++s) weight_num *= binomial(config.c[s], x[s]);
    Rational w(weight_num, binomial(c, static_cast<int>(m)));
    w.canonicalize();
    const S weight = from_rational<S>(w);

    std::vector<long> xr(K, 0);
    std::vector<long> xc(L, 0);
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < L; ++j) {
        xr[i] += x[static_cast<std::size_t>(i) * L + j];
        xc[j] += x[static_cast<std::size_t>(i) * L + j];
      }
    }
    // f(A, B, x) with A + x_A = a + c_A and B + x_B = b + c_B.
    S f = k(m - 1) * Q.a() * Q.b();
    for (int i = 0; i < K; ++i) f -= k(xr[i] * (xr[i] - 1)) / k(m) * Q.a(i) * Q.b();
    for (int j = 0; j < L; ++j) f -= k(xc[j] * (xc[j] - 1)) / k(m) * Q.a() * Q.b(j);
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < L; ++j) {
        const long xij = x[static_cast<std::size_t>(i) * L + j];
        f += k(xij * (xij - 1)) / k(m) * Q.a(i) * Q.b(j);
      }
    }
    total += weight * f;
  });
  return total;
}

#define TWOLOCUS_INSTANTIATE(S)                                                                \
  template class MarginalProbabilities<S>;                                                     \
  template S q0<S>(const TwoLocusConfig&, const Params<S>&);                                   \
  template S q1<S>(const TwoLocusConfig&, const Params<S>&);                                   \
  template struct SigmaBreakdown<S>;                                                           \
  template SigmaBreakdown<S> sigma_terms<S>(const TwoLocusConfig&, const Params<S>&, SigmaVariant); \
  template S sigma<S>(const TwoLocusConfig&, const Params<S>&, SigmaVariant);                  \
  template class SecondOrderSolver<S>;                                                         \
  template S q2_ab0<S>(std::vector<int>, std::vector<int>, const Params<S>&);                  \
  template S q2<S>(const TwoLocusConfig&, SecondOrderSolver<S>&);                              \
  template S q2<S>(const TwoLocusConfig&, const Params<S>&);                                   \
  template S q_asymptotic<S>(const TwoLocusConfig&, const Params<S>&, ExpansionOrder);         \
  template S q1_subsampling_oracle<S>(const TwoLocusConfig&, const Params<S>&, int);

TWOLOCUS_INSTANTIATE(double)
TWOLOCUS_INSTANTIATE(Rational)

#undef TWOLOCUS_INSTANTIATE

}  // namespace twolocus
