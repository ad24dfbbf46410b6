#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evogen/event_time.hpp"
#include "evogen/metric.hpp"

namespace evogen {

// Mark-mass vector of a leaf: sub-masses by torus site, sorted by site.
// Empty means the space is unmarked.
using MarkVector = std::vector<std::pair<int, double>>;

// Finite ultrametric measure space as a dendrogram. Leaves sit at height 0;
// merge nodes carry strictly increasing heights toward the root. Distances
// are LCA heights; leaves in different components of a forest are at the
// sentinel height kNeverMerged.
class AtomicUmm {
 public:
  struct Node {
    EventTime height{};
    int parent = -1;
    std::vector<int> children;
    std::uint64_t leaf_id = 0;
    double mass = 0.0;  // leaves: atom mass; internal: cached subtree mass
    MarkVector marks;
  };

  int leaf_count() const { return int(leaves_.size()); }
  int node_count() const { return int(nodes_.size()); }
  const Node& node(int idx) const { return nodes_[idx]; }
  const std::vector<int>& leaf_nodes() const { return leaves_; }
  const std::vector<int>& roots() const { return roots_; }
  const Node& leaf(int pos) const { return nodes_[leaves_[pos]]; }
  bool marked() const { return marked_; }
  double total_mass() const;
  // Largest finite merge height (0 for a single leaf).
  EventTime root_height() const;

  // LCA distance between leaf positions.
  EventTime distance(int leaf_a, int leaf_b) const;
  std::vector<std::vector<EventTime>> distance_matrix() const;

  void validate() const;

  friend class UmmBuilder;

 private:
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  std::vector<int> roots_;
  std::vector<int> depth_;
  bool marked_ = false;
};

class UmmBuilder {
 public:
  int add_leaf(std::uint64_t id, double mass, MarkVector marks = {});
  int merge(const std::vector<int>& children, EventTime height);
  AtomicUmm build();

 private:
  std::vector<AtomicUmm::Node> nodes_;
  std::vector<int> leaves_;
};

struct Ball {
  std::vector<int> leaves;  // leaf positions, ascending
  std::uint64_t representative = 0;
  double mass = 0.0;
  MarkVector marks;
};

// Balls of radius h: closed uses r <= h, open uses r < h. Balls are ordered
// by their smallest leaf position.
std::vector<Ball> ball_decomposition(const AtomicUmm& u, double h, bool closed = true);

// h-trunk. subtract=true shifts the surviving merge heights down by h (the
// trunk lives at height 0); subtract=false keeps original heights. Each new
// leaf carries its ball's mass and aggregated mark-mass vector.
AtomicUmm cut_trunk(const AtomicUmm& u, double h, bool subtract);

// Family sizes: closed-ball masses at radius h, sorted descending.
using FamilyVector = std::vector<double>;
FamilyVector family_size_decomposition(const AtomicUmm& u, double h);

// l1 distance on the ordered-mass cone (shorter vector zero-padded).
double dS(const FamilyVector& a, const FamilyVector& b);

// nu^k: pushforward of the k-fold product measure under pairwise distances
// (and marks). Support entries are aggregated and sorted.
struct NuSupportPoint {
  std::vector<EventTime> distances;  // pairs (i,j), i<j, lexicographic
  std::vector<int> marks;            // size k; -1 where unmarked
  double mass = 0.0;
};

struct DistanceMatrixDistribution {
  int k = 2;
  bool marked = false;
  double total_mass = 0.0;
  std::vector<NuSupportPoint> support;

  // Mass with all pairwise distances <= r (cdf for k=2).
  double mass_all_leq(double r) const;
};

DistanceMatrixDistribution nu_k(const AtomicUmm& u, int k,
                                std::size_t budget = 1000000);
DistanceMatrixDistribution nu_k_sampled(const AtomicUmm& u, int k, std::size_t n_draws,
                                        std::uint64_t seed);

// nu^2([0,T]) on the unmarked projection: sum over ordered leaf pairs
// (diagonal included) with distance <= T of the mass products.
double nu2_mass_below(const AtomicUmm& u, double T);

// Atom masses sorted descending (= family_size_decomposition at h=0).
FamilyVector ord(const AtomicUmm& u);

// mu* = sum_x mu({x})^2 delta_x on the same points.
std::vector<double> atom_square_measure(const std::vector<double>& masses);

// f_eps(mu) = int int (Psi(d(x,y)/eps) - 1{x=y}) dmu dmu, Psi(r) = max(0,1-r).
double atomicity_functional(const FiniteMetricSpace& space,
                            const std::vector<double>& masses, double eps);

}  // namespace evogen
