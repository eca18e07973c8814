#include "amodscale/matching.hpp"

#include <cmath>
#include <limits>

#include "amodscale/errors.hpp"

namespace amodscale {

namespace {

// Minimum-cost assignment of every row to a distinct column, n_rows <= n_cols.
// cost is row-major. Returns the column per row.
std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n_rows,
                                   std::size_t n_cols) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n_rows + 1, 0.0), v(n_cols + 1, 0.0);
  std::vector<std::size_t> p(n_cols + 1, 0), way(n_cols + 1, 0);
  for (std::size_t i = 1; i <= n_rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n_cols + 1, inf);
    std::vector<char> used(n_cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n_cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n_cols + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n_cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n_rows, 0);
  for (std::size_t j = 1; j <= n_cols; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

}  // namespace

Matching max_weight_matching(const WeightMatrix& weights, MatchingMode mode) {
  const std::size_t n_rows = weights.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : weights.front().size();
  Matching result;
  result.row_to_col.assign(n_rows, std::nullopt);
  if (n_rows == 0 || n_cols == 0) return result;

  double abs_sum = 0.0;
  for (const auto& row : weights) {
    if (row.size() != n_cols) throw DomainError("ragged weight matrix");
    for (const auto& w : row) {
      if (!w) continue;
      if (!std::isfinite(*w)) throw DomainError("non-finite matching weight");
      abs_sum += std::abs(*w);
    }
  }
  const auto eligible = [&](const std::optional<double>& w) {
    return w && (mode == MatchingMode::kCardinality || *w >= 0.0);
  };
  // A bonus larger than any weight difference makes every extra pair worth more
  // than any reshuffle of weights; forbidden pairs cost more than that.
  const double bonus = mode == MatchingMode::kCardinality ? 2.0 * abs_sum + 1.0 : 0.0;
  const double forbidden = 2.0 * (abs_sum + bonus * static_cast<double>(n_rows)) + 1.0;

  const std::size_t width = n_cols + n_rows;
  std::vector<double> cost(n_rows * width, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto& w = weights[r][c];
      cost[r * width + c] = eligible(w) ? -(*w + bonus) : forbidden;
    }
  }

  const auto assignment = hungarian(cost, n_rows, width);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t c = assignment[r];
    if (c < n_cols && eligible(weights[r][c])) {
      result.row_to_col[r] = c;
      result.total_weight += *weights[r][c];
      ++result.size;
    }
  }
  return result;
}

}  // namespace amodscale
