#pragma once

#include <vector>

namespace evogen {

// Dense finite (pseudo-)metric space, row-major n x n distances.
struct FiniteMetricSpace {
  int n = 0;
  std::vector<double> d;

  double dist(int i, int j) const { return d[std::size_t(i) * n + j]; }
  void set_dist(int i, int j, double v) {
    d[std::size_t(i) * n + j] = v;
    d[std::size_t(j) * n + i] = v;
  }
  static FiniteMetricSpace zeros(int n_points) {
    FiniteMetricSpace s;
    s.n = n_points;
    s.d.assign(std::size_t(n_points) * n_points, 0.0);
    return s;
  }
  // Checks symmetry, zero diagonal and nonnegativity; triangle inequality
  // optionally (O(n^3)).
  void validate(bool check_triangle = false, double tol = 1e-9) const;
};

}  // namespace evogen
