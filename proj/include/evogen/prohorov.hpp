#pragma once

#include <vector>

#include "evogen/metric.hpp"

namespace evogen {

// Exact Prohorov distance between two finite measures mu1, mu2 given as mass
// vectors over the points of `space` (entries may be zero). Uses the interval
// decomposition over the sorted distinct distances: within an interval
// (t_l, t_{l+1}] the worst mass deficit M_l = max_A (mu_i(A) - mu_j(A^eps))
// is a max-flow complement, and the distance is the smallest feasible
// max(t_l, M_l).
double prohorov_distance(const FiniteMetricSpace& space,
                         const std::vector<double>& mu1,
                         const std::vector<double>& mu2);

// Prohorov distance between two laws on the real line given as atoms
// (position, mass). Convenience wrapper building the |x-y| metric space.
double prohorov_distance_1d(const std::vector<std::pair<double, double>>& law1,
                            const std::vector<std::pair<double, double>>& law2);

}  // namespace evogen
