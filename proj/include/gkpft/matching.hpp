#pragma once

#include <vector>

namespace gkpft {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// Maximum-weight matching on a general graph by the O(n^3) primal-dual
// blossom method. Returns mate[v] = matched partner or -1. With
// max_cardinality set, the matching has maximum size and maximum weight
// among those. When `certify` is set the final dual solution is checked for
// feasibility and complementary slackness (throws std::logic_error on
// violation), which certifies optimality of the returned matching.
std::vector<int> max_weight_matching(int n,
                                     const std::vector<WeightedEdge>& edges,
                                     bool max_cardinality = false,
                                     bool certify = false);

// Minimum-weight perfect matching via the standard weight reversal. Throws
// std::runtime_error when the graph admits no perfect matching.
std::vector<int> min_weight_perfect_matching(
    int n, const std::vector<WeightedEdge>& edges, bool certify = false);

}  // namespace gkpft
