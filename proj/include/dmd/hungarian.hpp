#pragma once

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "similarity.hpp"

namespace dmd {

namespace detail {

/// Exact rectangular assignment by shortest augmenting paths with dual
/// potentials, O(r^2 * c). Minimizes total cost over an r x c row-major
/// matrix with r <= c; returns the matched column of each row.
inline std::vector<int> solve_assignment_min(const std::vector<double>& cost,
                                             int r, int c) {
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual unmatched slot.
  std::vector<double> u(r + 1, 0.0), v(c + 1, 0.0), minv(c + 1, 0.0);
  std::vector<int> match(c + 1, 0), way(c + 1, 0);
  for (int i = 1; i <= r; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(c + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= c; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * c + (j - 1)] -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= c; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    // Unwind the augmenting path.
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(r, -1);
  for (int j = 1; j <= c; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// One-to-one assignment of min(rows, cols) pairs maximizing total
/// similarity. Deterministic; pairs are returned sorted by query index.
inline std::vector<std::pair<int, int>> assign(const SimilarityMatrix& s) {
  if (s.rows <= 0 || s.cols <= 0)
    throw std::invalid_argument("cannot assign over an empty matrix");
  const bool transpose = s.rows > s.cols;
  const int r = transpose ? s.cols : s.rows;
  const int c = transpose ? s.rows : s.cols;
  std::vector<double> cost(static_cast<std::size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      cost[static_cast<std::size_t>(i) * c + j] =
          -(transpose ? s.at(j, i) : s.at(i, j));
  const std::vector<int> row_to_col = detail::solve_assignment_min(cost, r, c);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(r);
  for (int i = 0; i < r; ++i) {
    if (transpose)
      pairs.emplace_back(row_to_col[i], i);
    else
      pairs.emplace_back(i, row_to_col[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace dmd
