#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "evogen/geo.hpp"
#include "evogen/umm.hpp"

namespace evogen {

// Finite-system rescaling: heights / time_div, masses / mass_div, marks
// dropped (locations homogenize in the limit).
AtomicUmm rescale_genealogy(const AtomicUmm& u, double time_div, double mass_div);

// Population density of a count-scaled measure: total mass / volume.
double theta(const AtomicUmm& u, int volume);

// Replicate fan-out: worker r runs with derive_seed(base_seed, r); results
// land by index, so serial and parallel schedules agree bit for bit.
std::vector<double> run_replicates(int n, std::uint64_t base_seed,
                                   const std::function<double(std::uint64_t)>& worker,
                                   bool parallel = true);

// Finite-system scheme: tori of growing volume, time rescaled by |G|. The
// rescaled genealogy approaches a Kingman coalescent whose pair rate is the
// clumping-corrected resampling rate D = gamma / (1 + gamma g).
struct FssConfig {
  int dimension = 3;
  std::vector<int> half_widths = {1, 2, 3};
  int n_per_site = 2;
  double gamma = 1.0;
  double horizon = 20.0;  // rescaled units
  int replicates = 400;
  std::vector<double> h_grid = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  std::uint64_t seed = 1;
  int green_truncation = 8192;
  bool parallel = true;
};

struct FssSizeResult {
  int half_width = 0;
  int volume = 0;
  int n = 0;
  int replicates = 0;
  int censored = 0;        // runs without a rescaled-horizon MRCA
  double mean_mrca = 0.0;  // rescaled; censored runs enter at the horizon
  double se_mrca = 0.0;
  double mean_sq_zero = 0.0;             // sum of squared masses at lookback 0
  std::vector<double> mean_pair_curve;   // mean sum f^2 at the grid lookbacks
  std::vector<double> normalized_curve;  // (curve - curve0) / (1 - curve0)
  std::vector<double> mean_block_count;  // mean family count at the grid
  double sup_gap_pair_law = 0.0;  // sup_h |normalized - (1 - e^{-D h})|
  // Mean over the grid of the two-sample KS statistic between the rescaled
  // block counts and a simulated rate-D Kingman started from n blocks.
  double block_ks = 0.0;
};

struct FssResult {
  double g = 0.0;  // Green integral of the symmetrized kernel
  double D = 0.0;
  std::vector<double> h_grid;
  std::vector<FssSizeResult> sizes;
};

FssResult fss_experiment(const FssConfig& config);

}  // namespace evogen
