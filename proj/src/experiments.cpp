#include "evogen/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evogen/coalescent.hpp"
#include "evogen/moran.hpp"
#include "evogen/rng.hpp"
#include "evogen/stats.hpp"

namespace evogen {

AtomicUmm rescale_genealogy(const AtomicUmm& u, double time_div, double mass_div) {
  if (!(time_div > 0.0) || !(mass_div > 0.0))
    throw std::invalid_argument("rescale_genealogy: divisors must be positive");
  UmmBuilder b;
  std::vector<int> remap(u.node_count(), -1);
  for (int i = 0; i < u.node_count(); ++i) {
    const auto& nd = u.node(i);
    if (nd.children.empty()) {
      remap[i] = b.add_leaf(nd.leaf_id, nd.mass / mass_div);
    } else {
      std::vector<int> kids;
      kids.reserve(nd.children.size());
      for (int c : nd.children) kids.push_back(remap[c]);
      remap[i] = b.merge(kids, EventTime{nd.height.t / time_div, nd.height.tick});
    }
  }
  return b.build();
}

double theta(const AtomicUmm& u, int volume) {
  if (volume <= 0) throw std::invalid_argument("theta: volume must be positive");
  return u.total_mass() / volume;
}

std::vector<double> run_replicates(int n, std::uint64_t base_seed,
                                   const std::function<double(std::uint64_t)>& worker,
                                   bool parallel) {
  std::vector<double> out(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int r = 0; r < n; ++r) out[r] = worker(derive_seed(base_seed, std::uint64_t(r)));
  return out;
}

FssResult fss_experiment(const FssConfig& config) {
  if (config.half_widths.empty() || config.replicates < 1 || config.h_grid.empty())
    throw std::invalid_argument("fss: empty sizes, replicates, or grid");

  const MigrationKernel kernel = simple_walk_kernel(config.dimension);
  GreenOptions gopt;
  gopt.parallel = config.parallel;
  const GreenResult green = green_integral(kernel, config.green_truncation, gopt);
  if (green.divergent)
    throw std::domain_error("fss: recurrent kernel, no diffusive limit rate");

  FssResult out;
  out.g = green.g;
  out.D = diffusion_constant(config.gamma, green);
  out.h_grid = config.h_grid;
  std::vector<double> grid = config.h_grid;
  std::sort(grid.begin(), grid.end());

  for (std::size_t si = 0; si < config.half_widths.size(); ++si) {
    GeoTorus torus{config.dimension, config.half_widths[si]};
    const int V = torus.volume();
    const int n = config.n_per_site * V;
    const int R = config.replicates;
    const int G = int(grid.size());

    FssSizeResult size;
    size.half_width = config.half_widths[si];
    size.volume = V;
    size.n = n;
    size.replicates = R;
    size.mean_pair_curve.assign(G, 0.0);
    size.normalized_curve.assign(G, 0.0);
    size.mean_block_count.assign(G, 0.0);

    std::vector<double> mrca(R, 0.0);
    std::vector<int> censored(R, 0);
    std::vector<double> sq(std::size_t(R) * G, 0.0);
    std::vector<double> cnt(std::size_t(R) * G, 0.0);
    std::vector<double> sq0(R, 0.0);

#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (int r = 0; r < R; ++r) {
      MoranConfig mc;
      mc.torus = torus;
      mc.n_per_site = config.n_per_site;
      mc.gamma = config.gamma;
      mc.kernel = kernel;
      mc.t_max = config.horizon * V;
      mc.seed = derive_seed(config.seed, (std::uint64_t(si) << 32) | std::uint64_t(r));
      const TrackedRun run = simulate_moran_tracked(mc);

      censored[r] = run.mrca_censored ? 1 : 0;
      mrca[r] = run.mrca_censored ? config.horizon
                                  : run.snapshot.root_height().t / V;
      const AtomicUmm scaled = rescale_genealogy(run.snapshot, V, V);
      // Families of the probability measure: each replicate's masses are
      // divided by their total (= occupied sites / V), so the pair law runs
      // from ~1/n at depth zero to 1 at fixation.
      double tot = 0.0;
      {
        const FamilyVector f0 = family_size_decomposition(scaled, 0.0);
        for (double m : f0) tot += m;
        double acc = 0.0;
        for (double m : f0) acc += (m / tot) * (m / tot);
        sq0[r] = acc;
      }
      for (int gi = 0; gi < G; ++gi) {
        const FamilyVector f = family_size_decomposition(scaled, grid[gi]);
        double acc = 0.0;
        for (double m : f) acc += (m / tot) * (m / tot);
        sq[std::size_t(r) * G + gi] = acc;
        cnt[std::size_t(r) * G + gi] = double(f.size());
      }
    }

    const MeanSe m = mean_se(mrca);
    size.mean_mrca = m.mean;
    size.se_mrca = m.se;
    for (int r = 0; r < R; ++r) {
      size.censored += censored[r];
      size.mean_sq_zero += sq0[r] / R;
      for (int gi = 0; gi < G; ++gi) {
        size.mean_pair_curve[gi] += sq[std::size_t(r) * G + gi] / R;
        size.mean_block_count[gi] += cnt[std::size_t(r) * G + gi] / R;
      }
    }
    for (int gi = 0; gi < G; ++gi) {
      size.normalized_curve[gi] =
          (size.mean_pair_curve[gi] - size.mean_sq_zero) / (1.0 - size.mean_sq_zero);
      const double ref = 1.0 - std::exp(-out.D * grid[gi]);
      size.sup_gap_pair_law =
          std::max(size.sup_gap_pair_law, std::abs(size.normalized_curve[gi] - ref));
    }

    // Rate-D Kingman reference for the block-count law: n blocks on one site
    // of a frozen walk, merge rate D per pair.
    std::vector<double> ref_cnt(std::size_t(R) * G, 0.0);
#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (int r = 0; r < R; ++r) {
      CoalescentConfig cc;
      cc.torus = {1, 1};
      cc.kernel = MigrationKernel{1, {{0}}, {1.0}};
      cc.gamma = out.D;
      cc.horizon = grid.back();
      cc.seed = derive_seed(config.seed,
                            (1ULL << 62) | (std::uint64_t(si) << 32) | std::uint64_t(r));
      cc.initial = LabeledPartition::singletons(std::vector<int>(n, 0));
      const CoalescentPath ref_path = simulate_spatial_kingman(cc);
      for (int gi = 0; gi < G; ++gi)
        ref_cnt[std::size_t(r) * G + gi] = double(ref_path.block_count_at(grid[gi]));
    }
    for (int gi = 0; gi < G; ++gi) {
      std::vector<double> a(R), b(R);
      for (int r = 0; r < R; ++r) {
        a[r] = cnt[std::size_t(r) * G + gi];
        b[r] = ref_cnt[std::size_t(r) * G + gi];
      }
      size.block_ks += ks_statistic_two_sample(std::move(a), std::move(b)) / G;
    }
    out.sizes.push_back(std::move(size));
  }
  return out;
}

}  // namespace evogen
