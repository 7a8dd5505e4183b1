#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace sentinel {

// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct AssignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

// Minimum-cost one-to-one assignment (Kuhn-Munkres with potentials,
// O(n^2 m)). Every row of the smaller side is matched before gating; pairs
// costing more than max_cost are then dropped and reported unmatched.
// Rows are inserted in index order, so among equal-cost optima the one
// found first for the lowest row index wins.
AssignmentResult assign(const CostMatrix& cost, double max_cost);

// Sum of cost(r, c) over the pairs, accumulated in row order.
double total_cost(const CostMatrix& cost,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace sentinel
