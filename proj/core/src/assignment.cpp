#include "pqd/assignment.hpp"

#include <limits>

#include "pqd/errors.hpp"

namespace pqd {

// Shortest augmenting path formulation with potentials (minimises -weights).
std::vector<int> max_weight_assignment(const RMatrix& weights) {
  if (weights.rows() != weights.cols()) throw ValidationError("assignment needs a square matrix");
  const int n = static_cast<int>(weights.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // 1-based arrays; column 0 is a virtual sink.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) col[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return col;
}

}  // namespace pqd
