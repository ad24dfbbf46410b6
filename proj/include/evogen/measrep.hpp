#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evogen/event_time.hpp"
#include "evogen/moran.hpp"
#include "evogen/umm.hpp"

namespace evogen {

// One atom of the measure representation: a time-T ancestor together with
// its descendant set at time T + h, broken down by the descendants' current
// sites. Counts are exact integers; the atom's measure at site g is
// count(g) / occupancy(g).
struct MeasureAtom {
  std::uint64_t label = 0;  // the ancestor's uniform label
  int representative = 0;   // the ancestor's slot index at time T
  std::vector<int> members;                      // descendant slots, ascending
  std::vector<std::pair<int, int>> site_counts;  // (site at T + h, count), ascending

  int total_count() const;
};

struct MeasureSnapshot {
  EventTime h;                     // forward offset from the anchor
  std::vector<int> occupancy;      // individuals per site at time T + h
  std::vector<MeasureAtom> atoms;  // ordered by representative
};

// Measure representation of one forward run anchored at T: every individual
// alive at T receives a label, and the path tracks the site-normalized
// descendant masses of those ancestors over h in [0, t_end - T]. Atoms
// vanish when their descendant lines die out, so supports are nested.
// Without a grid there is one snapshot per event after T that alters the
// representation (plus the initial state below all events); with a grid,
// one per requested offset.
struct AtomicMeasurePath {
  double T = 0.0;
  double t_end = 0.0;  // horizon of the underlying log
  int n = 0;
  int n_sites = 0;
  std::uint64_t label_seed = 0;
  std::vector<MeasureSnapshot> snaps;  // ascending h

  // Last snapshot with h' <= h (all ticks at equal timestamp included).
  const MeasureSnapshot& at(double h) const;
};

AtomicMeasurePath build_measure_representation(const EventLog& log, double T,
                                               std::uint64_t label_seed,
                                               const std::vector<double>& grid = {});

// Mass of one atom: sum over its sites of count / occupancy.
double atom_mass(const MeasureAtom& atom, const std::vector<int>& occupancy);

// State-space invariants: each snapshot partitions the population, counts
// are positive and conserved per site against the occupancy (exact integer
// identity), labels are distinct, and supports shrink as h grows.
void check_smr(const AtomicMeasurePath& path);

// First offset h at which a single ancestor carries the whole population
// (the fixation time of the representation), if reached before the horizon.
std::optional<EventTime> mrca_time(const AtomicMeasurePath& path);

// Sum over atoms of (mass / #occupied sites)^2 at offset h: nu^2([0,h]) of
// the snapshot normalized to a probability measure.
double pair_moment(const AtomicMeasurePath& path, double h);

// Atom masses of a snapshot, descending.
FamilyVector family_sizes(const MeasureSnapshot& snap);

// Expected absorption time of the ancestral-mass martingale for a
// Wright-Fisher/Moran sample of size n: 2 (n-1) ln(n / (n-1)).
double wf_absorption_expectation(int n);

}  // namespace evogen
