#include "sentinel/assignment.hpp"

#include <algorithm>
#include <limits>

namespace sentinel {

namespace {

// Solves for n <= m. Returns, for each row, its column.
std::vector<std::size_t> solve_wide(std::size_t n, std::size_t m,
                                    const auto& at) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) row_to_col[owner[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult assign(const CostMatrix& cost, double max_cost) {
  AssignmentResult result;
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }

  std::vector<std::pair<std::size_t, std::size_t>> matched;
  if (rows <= cols) {
    const auto r2c = solve_wide(rows, cols, [&](std::size_t r, std::size_t c) {
      return cost(r, c);
    });
    for (std::size_t r = 0; r < rows; ++r) matched.emplace_back(r, r2c[r]);
  } else {
    const auto c2r = solve_wide(cols, rows, [&](std::size_t c, std::size_t r) {
      return cost(r, c);
    });
    for (std::size_t c = 0; c < cols; ++c) matched.emplace_back(c2r[c], c);
    std::sort(matched.begin(), matched.end());
  }

  std::vector<char> row_used(rows, 0);
  std::vector<char> col_used(cols, 0);
  for (const auto& [r, c] : matched) {
    if (cost(r, c) > max_cost) continue;
    result.pairs.emplace_back(r, c);
    row_used[r] = 1;
    col_used[c] = 1;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_used[r]) result.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  }
  return result;
}

double total_cost(const CostMatrix& cost,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  double sum = 0.0;
  for (const auto& [r, c] : pairs) sum += cost(r, c);
  return sum;
}

}  // namespace sentinel
