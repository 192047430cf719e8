#pragma once

// Sparse square linear systems solved by row-wise Gaussian elimination
// without pivoting. Callers guarantee strict row diagonal dominance, which
// keeps every pivot nonzero and the elimination stable in floating point.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twolocus/numerics.hpp"

namespace twolocus {

template <Scalar S>
class SparseSystem {
 public:
  using Row = std::map<std::size_t, S>;

  explicit SparseSystem(std::size_t size) : rows_(size), rhs_(size, from_int<S>(0)) {}

  std::size_t size() const { return rows_.size(); }

  void add(std::size_t row, std::size_t col, const S& value) {
    auto [it, inserted] = rows_[row].try_emplace(col, value);
    if (!inserted) it->second += value;
  }
  void add_rhs(std::size_t row, const S& value) { rhs_[row] += value; }

  const Row& row(std::size_t i) const { return rows_[i]; }
  const S& rhs(std::size_t i) const { return rhs_[i]; }

  /// Solves in place; throws std::runtime_error on a zero pivot.
  std::vector<S> solve() && {
    const std::size_t n = rows_.size();
    std::vector<std::vector<std::pair<std::size_t, S>>> upper(n);
    std::vector<S> pivots(n);
    for (std::size_t i = 0; i < n; ++i) {
      Row& row = rows_[i];
      while (!row.empty() && row.begin()->first < i) {
        const auto [j, value] = *row.begin();
        S factor = value / pivots[j];
        row.erase(row.begin());
        for (const auto& [col, u] : upper[j]) {
          auto [it, inserted] = row.try_emplace(col, -(factor * u));
          if (!inserted) {
            it->second -= factor * u;
            if (it->second == 0) row.erase(it);
          }
        }
        rhs_[i] -= factor * rhs_[j];
      }
      auto diag = row.find(i);
      if (diag == row.end() || diag->second == 0) {
        throw std::runtime_error("singular linear system: zero pivot at row " + std::to_string(i));
      }
      pivots[i] = diag->second;
      row.erase(diag);
      upper[i].assign(row.begin(), row.end());
      row.clear();
    }

    std::vector<S> x(n, from_int<S>(0));
    for (std::size_t k = n; k-- > 0;) {
      S acc = rhs_[k];
      for (const auto& [col, u] : upper[k]) acc -= u * x[col];
      x[k] = acc / pivots[k];
    }
    return x;
  }

 private:
  std::vector<Row> rows_;
  std::vector<S> rhs_;
};

}  // namespace twolocus
