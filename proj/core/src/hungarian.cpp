#include "selfseg/hungarian.hpp"

#include <limits>

#include "selfseg/errors.hpp"

namespace selfseg {
namespace {

// Potentials-based Hungarian algorithm (e-maxx formulation), 1-indexed.
// Entries equal to +inf are forbidden.
std::vector<int> hungarian(const CostMatrix& a) {
  const int n = a.rows;
  const int m = a.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      if (j1 < 0 || delta == inf) return {};  // infeasible
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (p[static_cast<std::size_t>(j)] != 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

}  // namespace

double assignment_cost(const CostMatrix& cost, const std::vector<int>& assignment) {
  double total = 0.0;
  for (int r = 0; r < cost.rows; ++r) total += cost(r, assignment[static_cast<std::size_t>(r)]);
  return total;
}

std::vector<int> solve_assignment(const CostMatrix& cost) {
  if (cost.rows > cost.cols) throw ValidationError("assignment: more rows than columns");
  if (cost.values.size() != static_cast<std::size_t>(cost.rows) * cost.cols)
    throw ValidationError("assignment: cost matrix size mismatch");
  if (cost.rows == 0) return {};
  auto result = hungarian(cost);
  if (result.empty()) throw ValidationError("assignment: infeasible cost matrix");
  return result;
}

std::vector<int> solve_assignment_lexicographic(const CostMatrix& cost, double tie_eps) {
  std::vector<int> best = solve_assignment(cost);
  const double optimum = assignment_cost(cost, best);
  const double inf = std::numeric_limits<double>::infinity();

  // Fix rows one at a time to the smallest column that still admits an
  // optimal completion.
  CostMatrix constrained = cost;
  std::vector<char> col_taken(static_cast<std::size_t>(cost.cols), 0);
  for (int r = 0; r < cost.rows; ++r) {
    for (int c = 0; c < cost.cols; ++c) {
      if (col_taken[static_cast<std::size_t>(c)]) continue;
      CostMatrix trial = constrained;
      for (int cc = 0; cc < cost.cols; ++cc)
        if (cc != c) trial(r, cc) = inf;
      for (int rr = r + 1; rr < cost.rows; ++rr) trial(rr, c) = inf;
      auto candidate = hungarian(trial);
      if (candidate.empty()) continue;
      if (assignment_cost(cost, candidate) <= optimum + tie_eps) {
        constrained = std::move(trial);
        col_taken[static_cast<std::size_t>(c)] = 1;
        best = std::move(candidate);
        break;
      }
    }
  }
  return best;
}

}  // namespace selfseg
