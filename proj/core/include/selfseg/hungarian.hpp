#pragma once

#include <vector>

namespace selfseg {

/// Dense row-major cost matrix.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// Minimum-cost one-to-one assignment of rows to columns (rows <= cols).
/// Returns the column of each row. O(rows^2 * cols) shortest augmenting path.
std::vector<int> solve_assignment(const CostMatrix& cost);

/// Like solve_assignment, but among all assignments whose total cost is within
/// `tie_eps` of the optimum returns the lexicographically smallest column
/// vector. Makes the result independent of solver internals.
std::vector<int> solve_assignment_lexicographic(const CostMatrix& cost, double tie_eps = 1e-9);

double assignment_cost(const CostMatrix& cost, const std::vector<int>& assignment);

}  // namespace selfseg
