#pragma once

#include <vector>

#include "pqd/types.hpp"

namespace pqd {

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// algorithm, O(n^3)). Returns col such that row i is paired with col[i].
/// Deterministic; among equal-weight optima the lowest indices win.
[[nodiscard]] std::vector<int> max_weight_assignment(const RMatrix& weights);

}  // namespace pqd
