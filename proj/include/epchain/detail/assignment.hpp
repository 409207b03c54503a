#pragma once

#include <vector>

namespace epchain::detail {

/// Minimum-cost perfect matching on a dense n x n cost matrix (row-major),
/// shortest augmenting path with potentials, O(n^3). Returns col[row].
std::vector<int> min_cost_assignment(const std::vector<double>& cost, int n);

}  // namespace epchain::detail
