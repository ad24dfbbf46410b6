#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "evogen/experiments.hpp"
#include "evogen/rng.hpp"
#include "evogen/umm.hpp"
#include "oracles.hpp"

using namespace evogen;

TEST_CASE("rescaling divides heights and masses exactly") {
  Rng rng(4401);
  for (int rep = 0; rep < 10; ++rep) {
    const AtomicUmm u = evotest::dyadic_dendrogram(rng, 24, rep % 2 == 1);
    const AtomicUmm scaled = rescale_genealogy(u, 8.0, 8.0);
    REQUIRE(scaled.node_count() == u.node_count());

    for (int i = 0; i < u.node_count(); ++i) {
      const auto& a = u.node(i);
      const auto& b = scaled.node(i);
      if (a.children.empty()) {
        CHECK(b.leaf_id == a.leaf_id);
        CHECK(b.mass == a.mass / 8.0);
        CHECK(b.marks.empty());  // locations do not survive the limit
      } else {
        CHECK(b.height == EventTime{a.height.t / 8.0, a.height.tick});
      }
    }
    CHECK(scaled.total_mass() == u.total_mass() / 8.0);

    // The family decomposition commutes with the rescaling, bit for bit:
    // dyadic heights make h -> 8h and mass / 8 exact.
    for (int q = 0; q < 5; ++q) {
      const double h = evotest::dyadic_height(rng, 8);
      const FamilyVector big = family_size_decomposition(u, 8.0 * h);
      const FamilyVector small = family_size_decomposition(scaled, h);
      REQUIRE(big.size() == small.size());
      for (std::size_t k = 0; k < big.size(); ++k) CHECK(small[k] == big[k] / 8.0);
    }

    const int n = u.leaf_count();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const EventTime d = u.distance(i, j);
        const EventTime ds = scaled.distance(i, j);
        if (d == kLeafHeight || d == kNeverMerged) {
          CHECK(ds == d);
        } else {
          CHECK(ds == EventTime{d.t / 8.0, d.tick});
        }
      }
  }

  Rng one(4402);
  const AtomicUmm u = evotest::dyadic_dendrogram(one, 8);
  CHECK_THROWS_AS((void)rescale_genealogy(u, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)rescale_genealogy(u, 1.0, -2.0), std::invalid_argument);

  CHECK(theta(u, 4) == u.total_mass() / 4);
  CHECK_THROWS_AS((void)theta(u, 0), std::invalid_argument);
}

TEST_CASE("replicate fan-out is schedule independent") {
  const std::uint64_t base = 9090;
  const auto worker = [](std::uint64_t seed) {
    Rng r(seed);
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) acc += r.uniform01();
    return acc;
  };
  const std::vector<double> par = run_replicates(101, base, worker, true);
  const std::vector<double> ser = run_replicates(101, base, worker, false);
  REQUIRE(par.size() == 101);
  CHECK(par == ser);
  // Results land by replicate index.
  CHECK(par[17] == worker(derive_seed(base, 17)));
  CHECK(par[100] == worker(derive_seed(base, 100)));
}

namespace {

FssConfig smoke_config() {
  FssConfig c;
  c.dimension = 3;
  c.half_widths = {1};
  c.n_per_site = 2;
  c.gamma = 1.0;
  c.horizon = 6.0;
  c.replicates = 40;
  c.h_grid = {0.5, 1.0, 2.0, 4.0};
  c.seed = 77;
  c.green_truncation = 512;
  return c;
}

}  // namespace

TEST_CASE("finite system scheme: small instance is self consistent") {
  const FssConfig cfg = smoke_config();
  const FssResult res = fss_experiment(cfg);

  CHECK(res.g > 0.5);
  CHECK(res.g < 1.0);
  CHECK(res.D == doctest::Approx(1.0 / (1.0 + res.g)).epsilon(1e-15));
  CHECK(res.h_grid == cfg.h_grid);

  REQUIRE(res.sizes.size() == 1);
  const FssSizeResult& s = res.sizes[0];
  CHECK(s.half_width == 1);
  CHECK(s.volume == 8);
  CHECK(s.n == 16);
  CHECK(s.replicates == 40);
  CHECK(s.censored >= 0);
  CHECK(s.censored <= 40);
  CHECK(s.mean_mrca > 0.0);
  CHECK(s.mean_mrca <= cfg.horizon);
  CHECK(s.se_mrca > 0.0);

  REQUIRE(s.mean_pair_curve.size() == cfg.h_grid.size());
  REQUIRE(s.normalized_curve.size() == cfg.h_grid.size());
  REQUIRE(s.mean_block_count.size() == cfg.h_grid.size());
  CHECK(s.mean_sq_zero > 0.0);
  CHECK(s.mean_sq_zero < 1.0);
  double sup = 0.0;
  for (std::size_t gi = 0; gi < cfg.h_grid.size(); ++gi) {
    CHECK(s.mean_pair_curve[gi] >= s.mean_sq_zero);
    CHECK(s.mean_pair_curve[gi] <= 1.0 + 1e-12);
    if (gi > 0) {
      CHECK(s.mean_pair_curve[gi] >= s.mean_pair_curve[gi - 1]);
      CHECK(s.mean_block_count[gi] <= s.mean_block_count[gi - 1]);
    }
    CHECK(s.mean_block_count[gi] >= 1.0);
    CHECK(s.mean_block_count[gi] <= 16.0);
    const double renorm =
        (s.mean_pair_curve[gi] - s.mean_sq_zero) / (1.0 - s.mean_sq_zero);
    CHECK(s.normalized_curve[gi] == renorm);
    sup = std::max(sup, std::abs(renorm - (1.0 - std::exp(-res.D * cfg.h_grid[gi]))));
  }
  CHECK(s.sup_gap_pair_law == sup);
  CHECK(s.block_ks >= 0.0);
  CHECK(s.block_ks <= 1.0);
}

TEST_CASE("finite system scheme: deterministic and schedule independent") {
  FssConfig cfg = smoke_config();
  cfg.replicates = 16;
  const FssResult a = fss_experiment(cfg);
  const FssResult b = fss_experiment(cfg);
  cfg.parallel = false;
  const FssResult c = fss_experiment(cfg);

  const auto same = [](const FssResult& x, const FssResult& y) {
    CHECK(x.g == y.g);
    CHECK(x.D == y.D);
    CHECK(x.h_grid == y.h_grid);
    REQUIRE(x.sizes.size() == y.sizes.size());
    for (std::size_t i = 0; i < x.sizes.size(); ++i) {
      CHECK(x.sizes[i].censored == y.sizes[i].censored);
      CHECK(x.sizes[i].mean_mrca == y.sizes[i].mean_mrca);
      CHECK(x.sizes[i].se_mrca == y.sizes[i].se_mrca);
      CHECK(x.sizes[i].mean_sq_zero == y.sizes[i].mean_sq_zero);
      CHECK(x.sizes[i].mean_pair_curve == y.sizes[i].mean_pair_curve);
      CHECK(x.sizes[i].normalized_curve == y.sizes[i].normalized_curve);
      CHECK(x.sizes[i].mean_block_count == y.sizes[i].mean_block_count);
      CHECK(x.sizes[i].sup_gap_pair_law == y.sizes[i].sup_gap_pair_law);
      CHECK(x.sizes[i].block_ks == y.sizes[i].block_ks);
    }
  };
  same(a, b);
  same(a, c);
}

TEST_CASE("finite system scheme rejects recurrent geographies") {
  FssConfig cfg = smoke_config();
  cfg.dimension = 1;
  CHECK_THROWS_AS((void)fss_experiment(cfg), std::domain_error);
  cfg.dimension = 3;
  cfg.half_widths = {};
  CHECK_THROWS_AS((void)fss_experiment(cfg), std::invalid_argument);
}
