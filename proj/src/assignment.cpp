#include "genemix/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace genemix {

Assignment solve_assignment(const MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: matrix must be square");
  if (!cost.allFinite()) throw std::invalid_argument("solve_assignment: costs must be finite");
  const Index n = cost.rows();
  Assignment out;
  if (n == 0) return out;

  // 1-based arrays; p[j] is the row matched to column j, column 0 is a sentinel.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
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
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  out.assignment.assign(n, 0);
  for (Index j = 1; j <= n; ++j) out.assignment[p[j] - 1] = j - 1;
  for (Index i = 0; i < n; ++i) out.cost += cost(i, out.assignment[i]);
  return out;
}

}  // namespace genemix
