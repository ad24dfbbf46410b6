#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evogen/event_time.hpp"
#include "evogen/geo.hpp"
#include "evogen/umm.hpp"

namespace evogen {

// Spatial Moran model on a torus: per ordered co-located pair (i,j) an arrow
// i -> j falls at rate gamma/2 (j dies, replaced by an offspring of i at the
// same site); each individual additionally migrates at rate 1 via the kernel
// (self-jumps are thinned away).
struct MoranConfig {
  // `uniform` is the graphical construction's i.i.d. placement; `origin`
  // stacks everyone on site (0,..,0), which with the identity kernel gives a
  // panmictic population of size n_total.
  enum class Placement { uniform, origin };

  GeoTorus torus;
  int n_per_site = 1;
  double gamma = 1.0;
  MigrationKernel kernel;
  double t_max = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t max_events = std::uint64_t(1) << 62;
  Placement placement = Placement::uniform;

  int n_total() const { return n_per_site * int(torus.volume()); }
  void validate() const;
};

struct ResamplingEvent {
  double t = 0.0;
  std::uint64_t tick = 0;
  std::int32_t src = 0;  // parent
  std::int32_t dst = 0;  // dies, replaced by offspring of src
};

struct MigrationEvent {
  double t = 0.0;
  std::uint64_t tick = 0;
  std::int32_t ind = 0;
  std::int32_t from = 0;
  std::int32_t to = 0;
};

// Full graphical construction of one run. Resampling and migration events
// are each sorted by (t, tick); ticks are shared across both lists.
struct EventLog {
  MoranConfig config;
  std::vector<int> initial_sites;
  std::vector<ResamplingEvent> resampling;
  std::vector<MigrationEvent> migration;
  double t_end = 0.0;
  std::uint64_t total_events = 0;
  bool truncated = false;
};

EventLog simulate_moran(const MoranConfig& config);

// Ancestor map A_h(i, t): the individual whose lineage i sits on at time h,
// scanning resampling arrows with event time in [h, t] (both ends included,
// so an arrow exactly at the snapshot belongs to its past).
int ancestor(const EventLog& log, int individual, double h, double t);
std::vector<int> ancestors_all(const EventLog& log, double h, double t);
// Individuals alive at t descending from `individual` alive at h.
std::vector<int> descendants(const EventLog& log, int individual, double h, double t);
// Site of each individual after all migrations with time <= t.
std::vector<int> sites_at(const EventLog& log, double t);

// Streaming run that keeps only the pruned birth-node forest of the live
// population (no event log), for long horizons and large populations.
struct TrackOptions {
  bool extract_snapshot = true;
  bool stop_at_fixation = false;
};

struct TrackedRun {
  AtomicUmm snapshot;  // only when extract_snapshot
  bool mrca_censored = false;          // root forced over several founder lines
  std::optional<double> fixation_time;  // first time one founder line remains
  std::vector<int> final_sites;
  double t_end = 0.0;
  std::uint64_t total_events = 0;
  bool truncated = false;
};

TrackedRun simulate_moran_tracked(const MoranConfig& config, TrackOptions options = {});

}  // namespace evogen
