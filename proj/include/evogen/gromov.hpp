#pragma once

#include "evogen/umm.hpp"

namespace evogen {

struct GpBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct GpOptions {
  // At or below this leaf count on both sides the upper bound searches all
  // surjective leaf maps (with distortion pruning); above it a greedy
  // mass-rank map is used.
  int exhaustive_leaf_limit = 7;
};

// Certified lower and upper bounds on the marked Gromov-Prohorov distance.
// The lower bound combines the total-mass gap with half the Prohorov
// distance between the distance laws nu^2 (scaled for non-probability
// masses); the upper bound evaluates explicit correspondences on the glued
// union space.
GpBounds gp_bounds(const AtomicUmm& u, const AtomicUmm& v, GpOptions options = {});

}  // namespace evogen
