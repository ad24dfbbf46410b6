#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evogen/event_time.hpp"
#include "evogen/geo.hpp"
#include "evogen/moran.hpp"
#include "evogen/umm.hpp"

namespace evogen {

// Labeled partition of {0..n-1}: blocks hold ascending elements, are ordered
// by least element, and carry a torus site label.
struct LabeledPartition {
  int n = 0;
  std::vector<std::vector<int>> blocks;
  std::vector<int> labels;

  static LabeledPartition singletons(const std::vector<int>& sites);
  std::vector<int> block_of() const;  // element -> block index
  void validate(int n_sites) const;
};

struct CoalescentEvent {
  enum class Kind { merge, relabel };

  EventTime time;  // backward time
  Kind kind = Kind::merge;
  int a = -1;          // least element of the (first) block
  int b = -1;          // merge only: least element of the second block, a < b
  int new_label = -1;  // relabel only
};

// One realization of the spatial coalescent over backward time [0, horizon].
struct CoalescentPath {
  int n = 0;
  double horizon = 0.0;
  LabeledPartition initial;
  std::vector<CoalescentEvent> events;  // ascending EventTime

  // Applies every event with time.t <= s.
  LabeledPartition state_at(double s) const;
  int block_count_at(double s) const;
  // First time the path has exactly k blocks (time 0 if it starts there,
  // nullopt if it never does within the horizon).
  std::optional<EventTime> time_to_k_blocks(int k) const;
  // Element-pair coalescence times; kNeverMerged where blocks stay apart.
  std::vector<std::vector<EventTime>> pair_coalescence() const;
};

// Spatial Kingman coalescent: every co-located unordered block pair merges at
// rate gamma; every block relabels at rate 1 through the reversed kernel
// (self-jumps thinned away).
struct CoalescentConfig {
  GeoTorus torus;
  MigrationKernel kernel;  // forward kernel; the dual walks its reverse
  double gamma = 1.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  LabeledPartition initial;
};

CoalescentPath simulate_spatial_kingman(const CoalescentConfig& config);

// Dual read of a forward log at snapshot time T. Arrows at forward (s, tick)
// with s <= T merge at backward (T - s, tick); arrows exactly at T produce
// zero-height merges; within-site lineage hops are invisible; migrations
// relabel the block riding the moved slot.
CoalescentPath coalescent_from_event_log(const EventLog& log, double T);

// Dendrogram of a path: one leaf per initial block, carrying the block's
// share of its site's unit mass and marked by the initial label; blocks
// remaining at the horizon join at {horizon, 0}, so never-coalesced pairs sit
// at distance exactly horizon.
AtomicUmm umm_from_path(const CoalescentPath& path);

// Snapshot genealogy of a forward run via the dual read.
AtomicUmm genealogy_snapshot(const EventLog& log, double T);

// Block frequencies (sizes / n) at tau_k in uniformly shuffled order, for
// paintbox draws. nullopt if the path never reaches k blocks.
std::optional<std::vector<double>> block_frequencies_at_tau(const CoalescentPath& path,
                                                            int k, std::uint64_t seed);

}  // namespace evogen
