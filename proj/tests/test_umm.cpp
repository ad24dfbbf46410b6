#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "evogen/rng.hpp"
#include "evogen/umm.hpp"
#include "oracles.hpp"

using namespace evogen;
using namespace evotest;

namespace {

// Four individuals of mass 1/4 whose families join at heights 1, 2, 3:
// the ordered mass vector walks (1/4,1/4,1/4,1/4) -> (1/2,1/4,1/4) ->
// (3/4,1/4) -> (1).
AtomicUmm four_leaf_example() {
  UmmBuilder b;
  const int l0 = b.add_leaf(0, 0.25);
  const int l1 = b.add_leaf(1, 0.25);
  const int l2 = b.add_leaf(2, 0.25);
  const int l3 = b.add_leaf(3, 0.25);
  const int m1 = b.merge({l1, l2}, EventTime{1.0, 0});
  const int m2 = b.merge({m1, l0}, EventTime{2.0, 0});
  b.merge({m2, l3}, EventTime{3.0, 0});
  return b.build();
}

}  // namespace

TEST_CASE("four leaf family sizes and pair law") {
  const AtomicUmm u = four_leaf_example();
  u.validate();
  CHECK(u.total_mass() == 1.0);
  CHECK(u.root_height() == EventTime{3.0, 0});

  CHECK(family_size_decomposition(u, 0.0) == FamilyVector{0.25, 0.25, 0.25, 0.25});
  CHECK(family_size_decomposition(u, 1.0) == FamilyVector{0.5, 0.25, 0.25});
  CHECK(family_size_decomposition(u, 2.0) == FamilyVector{0.75, 0.25});
  CHECK(family_size_decomposition(u, 2.5) == FamilyVector{0.75, 0.25});
  CHECK(family_size_decomposition(u, 3.0) == FamilyVector{1.0});
  CHECK(ord(u) == FamilyVector{0.25, 0.25, 0.25, 0.25});

  // nu^2([0,T]) counts ordered pairs, diagonal included.
  CHECK(nu2_mass_below(u, 0.0) == 0.25);
  CHECK(nu2_mass_below(u, 1.0) == 0.375);
  CHECK(nu2_mass_below(u, 2.0) == 0.625);
  CHECK(nu2_mass_below(u, 3.0) == 1.0);

  // Closed vs open radius at an exact merge height.
  CHECK(ball_decomposition(u, 1.0, true).size() == 3);
  CHECK(ball_decomposition(u, 1.0, false).size() == 4);

  const AtomicUmm trunk = cut_trunk(u, 2.0, true);
  REQUIRE(trunk.leaf_count() == 2);
  CHECK(trunk.leaf(0).leaf_id == 0);
  CHECK(trunk.leaf(0).mass == 0.75);
  CHECK(trunk.leaf(1).leaf_id == 3);
  CHECK(trunk.leaf(1).mass == 0.25);
  CHECK(trunk.distance(0, 1) == EventTime{1.0, 0});
  CHECK(nu2_mass_below(trunk, 0.0) == 0.625);
}

TEST_CASE("ordered mass distance") {
  CHECK(dS({1.0}, {0.5, 0.5}) == 1.0);
  CHECK(dS({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(dS({0.75, 0.25}, {}) == 1.0);
  CHECK(dS({0.6, 0.4}, {0.5, 0.3}) == doctest::Approx(0.2));
}

TEST_CASE("random dendrograms validate and match the distance oracle") {
  Rng rng(2101);
  for (int rep = 0; rep < 60; ++rep) {
    const bool marked = rep % 2 == 0;
    const bool forest = rep % 3 == 0;
    const AtomicUmm u = dyadic_dendrogram(rng, 24, marked, forest);
    u.validate();
    CHECK(u.marked() == marked);

    const auto dm = u.distance_matrix();
    for (int i = 0; i < u.leaf_count(); ++i) {
      CHECK(u.distance(i, i) == kLeafHeight);
      for (int j = 0; j < u.leaf_count(); ++j) {
        CHECK(dm[i][j] == u.distance(i, j));
        CHECK(dm[i][j] == lca_distance_oracle(u, i, j));
        CHECK(dm[i][j] == dm[j][i]);
      }
    }
    if (u.roots().size() > 1) {
      bool saw_unmerged = false;
      for (int i = 0; i < u.leaf_count() && !saw_unmerged; ++i)
        for (int j = 0; j < u.leaf_count(); ++j)
          if (dm[i][j] == kNeverMerged) {
            saw_unmerged = true;
            break;
          }
      CHECK(saw_unmerged);
    }
  }
}

TEST_CASE("ultrametricity of generated trees") {
  Rng rng(2102);
  for (int rep = 0; rep < 20; ++rep) {
    const AtomicUmm u = dyadic_dendrogram(rng, 16);
    const auto dm = u.distance_matrix();
    const int n = u.leaf_count();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const EventTime lhs = dm[i][j];
          CHECK(!(std::max(dm[i][k], dm[k][j]) < lhs));
        }
  }
}

TEST_CASE("ball decomposition equals the component oracle") {
  Rng rng(2103);
  for (int rep = 0; rep < 40; ++rep) {
    const AtomicUmm u = dyadic_dendrogram(rng, 20, true, rep % 4 == 0);
    const double h = dyadic_height(rng, 4.0);
    for (const bool closed : {true, false}) {
      const auto balls = ball_decomposition(u, h, closed);
      const auto groups = balls_oracle(u, h, closed);
      REQUIRE(balls.size() == groups.size());
      double total = 0.0;
      for (std::size_t b = 0; b < balls.size(); ++b) {
        CHECK(balls[b].leaves == groups[b]);
        CHECK(balls[b].representative == u.leaf(groups[b].front()).leaf_id);
        double mass = 0.0;
        std::map<int, double> marks;
        for (int pos : groups[b]) {
          mass += u.leaf(pos).mass;
          for (auto& [site, g] : u.leaf(pos).marks) marks[site] += g;
        }
        CHECK(balls[b].mass == mass);
        CHECK(balls[b].marks == MarkVector(marks.begin(), marks.end()));
        total += mass;
      }
      CHECK(total == u.total_mass());
    }
  }
}

TEST_CASE("trunk identities are exact on dyadic dendrograms") {
  Rng rng(2104);
  for (int rep = 0; rep < 100; ++rep) {
    const AtomicUmm u = dyadic_dendrogram(rng, 32, rep % 2 == 0);
    const double root = u.root_height().t;
    const double h = dyadic_height(rng, root + 0.25);
    const double h_early = dyadic_height(rng, h);

    // f(u, h) computed through any earlier trunk.
    const AtomicUmm early = cut_trunk(u, h_early, true);
    CHECK(family_size_decomposition(u, h) ==
          family_size_decomposition(early, h - h_early));

    // nu^2([0,h]) is the squared sum of the radius-h family sizes.
    const FamilyVector f = family_size_decomposition(u, h);
    double sq = 0.0;
    for (double m : f) sq += m * m;
    CHECK(nu2_mass_below(u, h) == sq);

    // Telescoping: cutting twice equals cutting once at the summed depth.
    const AtomicUmm once = cut_trunk(u, h, true);
    const AtomicUmm twice = cut_trunk(early, h - h_early, true);
    REQUIRE(once.leaf_count() == twice.leaf_count());
    const auto dm_once = once.distance_matrix();
    const auto dm_twice = twice.distance_matrix();
    for (int i = 0; i < once.leaf_count(); ++i) {
      CHECK(once.leaf(i).mass == twice.leaf(i).mass);
      CHECK(once.leaf(i).leaf_id == twice.leaf(i).leaf_id);
      CHECK(once.leaf(i).marks == twice.leaf(i).marks);
      for (int j = 0; j < once.leaf_count(); ++j) CHECK(dm_once[i][j] == dm_twice[i][j]);
    }

    // Mass conservation and the zero cut.
    CHECK(once.total_mass() == u.total_mass());
    const AtomicUmm zero = cut_trunk(u, 0.0, true);
    CHECK(zero.leaf_count() == u.leaf_count());
    CHECK(zero.total_mass() == u.total_mass());

    // Keeping heights only shifts the surviving merge times by h.
    const AtomicUmm kept = cut_trunk(u, h, false);
    const auto dm_kept = kept.distance_matrix();
    for (int i = 0; i < once.leaf_count(); ++i)
      for (int j = 0; j < once.leaf_count(); ++j) {
        if (i == j) continue;
        CHECK(dm_kept[i][j].t == dm_once[i][j].t + h);
        CHECK(dm_kept[i][j].tick == dm_once[i][j].tick);
      }
  }
}

TEST_CASE("nu_k enumerates the sampled distance matrices") {
  const AtomicUmm u = four_leaf_example();
  const DistanceMatrixDistribution nu2 = nu_k(u, 2);
  CHECK(nu2.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  for (const double r : {0.0, 1.0, 2.0, 3.0})
    CHECK(nu2.mass_all_leq(r) == nu2_mass_below(u, r));

  // k = 3: mass with all three pairwise distances <= 1 is the sum of cubed
  // radius-1 family sizes.
  const DistanceMatrixDistribution nu3 = nu_k(u, 3);
  double cubes = 0.0;
  for (double m : family_size_decomposition(u, 1.0)) cubes += m * m * m;
  CHECK(nu3.mass_all_leq(1.0) == doctest::Approx(cubes).epsilon(1e-12));
  for (const NuSupportPoint& p : nu3.support) REQUIRE(p.distances.size() == 3);

  CHECK_THROWS_AS((void)nu_k(u, 12, 1000), std::length_error);
}

TEST_CASE("sampled nu_k approximates the exact law") {
  Rng rng(2105);
  const AtomicUmm u = dyadic_dendrogram(rng, 12, true);
  const DistanceMatrixDistribution exact = nu_k(u, 2);
  const DistanceMatrixDistribution sampled = nu_k_sampled(u, 2, 40000, 9);
  CHECK(sampled.total_mass == doctest::Approx(exact.total_mass).epsilon(1e-9));
  const double scale = exact.total_mass;
  for (const double q : {0.25, 0.5, 0.75}) {
    const double r = q * u.root_height().t;
    CHECK(std::abs(sampled.mass_all_leq(r) - exact.mass_all_leq(r)) / scale < 0.02);
  }
}

TEST_CASE("atom square measure and atomicity functional") {
  CHECK(atom_square_measure({0.5, 0.25}) == std::vector<double>{0.25, 0.0625});

  FiniteMetricSpace space = FiniteMetricSpace::zeros(2);
  space.set_dist(0, 1, 1.0);
  space.validate(true);
  // Two atoms at distance 1: Psi(1/eps) vanishes once eps <= 1 and the
  // diagonal is excluded, so f_eps sees only the cross term.
  CHECK(atomicity_functional(space, {0.5, 0.5}, 1.0) == 0.0);
  CHECK(atomicity_functional(space, {0.5, 0.5}, 2.0) == 0.25);
  CHECK(atomicity_functional(space, {0.75, 0.25}, 2.0) == doctest::Approx(0.1875));
}

TEST_CASE("builder rejects malformed trees") {
  {
    UmmBuilder b;
    b.add_leaf(0, 0.5);
    b.add_leaf(0, 0.5);
    CHECK_THROWS((void)b.build());
  }
  {
    UmmBuilder b;
    b.add_leaf(0, 0.0);
    CHECK_THROWS((void)b.build());
  }
  {
    UmmBuilder b;
    const int a = b.add_leaf(0, 0.5);
    const int c = b.add_leaf(1, 0.5);
    const int m = b.merge({a, c}, EventTime{2.0, 0});
    const int d = b.add_leaf(2, 0.5);
    b.merge({m, d}, EventTime{1.0, 0});  // parent below child
    CHECK_THROWS((void)b.build());
  }
  {
    UmmBuilder b;
    CHECK_THROWS((void)b.merge({}, EventTime{1.0, 0}));
  }
}
