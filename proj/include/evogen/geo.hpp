#pragma once

#include <cstdint>
#include <vector>

namespace evogen {

// Sites of the torus (-N, N]^d (intersected with Z^d, arithmetic mod 2N),
// addressed by a flat index. Coordinates are kept in their canonical
// representatives {-N+1, ..., N}.
struct GeoTorus {
  int d = 1;
  int half_width = 1;  // N

  int side() const { return 2 * half_width; }
  int volume() const;
  int wrap(long long c) const;
  int site_of(const std::vector<int>& coords) const;
  std::vector<int> coords_of(int site) const;
  int add_offset(int site, const std::vector<int>& offset) const;
  void validate() const;
};

// Finite-support homogeneous migration kernel a(0, xi) on Z^d.
struct MigrationKernel {
  int d = 1;
  std::vector<std::vector<int>> offsets;
  std::vector<double> probs;

  void validate() const;
  double prob_at_origin() const;
  int max_abs_offset() const;
  // Largest per-axis step variance; used to size power-sum boxes.
  double max_axis_variance() const;
  bool is_symmetric(double tol = 1e-12) const;
};

MigrationKernel simple_walk_kernel(int d);

// a^N(0, xi) = sum_k a(0, xi + 2Nk), folded exactly (finite support).
struct WrappedKernel {
  GeoTorus torus;
  std::vector<int> offset_sites;  // distinct torus sites, ascending
  std::vector<double> probs;

  double prob_at_zero() const;
  std::vector<std::vector<double>> dense() const;  // row-stochastic |G| x |G|
};

WrappedKernel wrap_kernel(const MigrationKernel& kernel, const GeoTorus& torus);

// a_hat(0, xi) = (a(0, xi) + a(0, -xi)) / 2.
// Jump machinery for a rate-1 walk with self-jumps thinned away: the walk
// moves at rate p_move and picks a non-zero wrapped offset by CDF inversion.
struct ThinnedWalk {
  int volume = 0;
  double p_move = 0.0;
  std::vector<double> cdf;     // cumulative probs of the non-zero offsets
  std::vector<int> target;     // offset-major: target[k * volume + from]

  // x in [0, p_move)
  int step(int from, double x) const;
};

ThinnedWalk make_thinned_walk(const MigrationKernel& kernel, const GeoTorus& torus);

MigrationKernel symmetrize(const MigrationKernel& kernel);

// a_bar(0, xi) = a(0, -xi); the step law of the time-reversed walk.
MigrationKernel reverse(const MigrationKernel& kernel);

enum class GreenMethod { power_sum, monte_carlo };

// g = integral_0^inf a_hat_{2s}(0,0) ds = (1/2) sum_{k>=0} a_hat^{(k)}(0,0),
// truncated at `truncation` terms. `divergent` flags recurrent-looking walks:
// some single return probability among the last quarter of terms still
// exceeds 1e-4.
struct GreenResult {
  double g = 0.0;
  double partial_sum = 0.0;  // sum_{k<=K} a_hat^(k)(0,0)
  bool divergent = false;
  double last_quarter_max_term = 0.0;
  int truncation = 0;
};

struct GreenOptions {
  GreenMethod method = GreenMethod::power_sum;
  std::uint64_t mc_walks = 200000;
  std::uint64_t seed = 1;
  bool parallel = true;
};

GreenResult green_integral(const MigrationKernel& symmetric_kernel, int truncation,
                           const GreenOptions& options = {});

// Return probabilities a_hat^{(k)}(0,0), k = 0..truncation. Exposed for the
// Fubini identity test and the benchmark.
std::vector<double> return_probabilities(const MigrationKernel& symmetric_kernel,
                                         int truncation, bool parallel);

double diffusion_constant(double gamma, double g);
double diffusion_constant(double gamma, const GreenResult& green);

// Heuristic irreducibility check: BFS over the wrapped support reaches every
// torus site within `max_steps` compositions.
bool reaches_all_sites(const WrappedKernel& kernel, int max_steps);

}  // namespace evogen
