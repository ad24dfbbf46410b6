#pragma once

#include <cstdint>
#include <limits>

namespace evogen {

// A time or tree height carried as (timestamp, tick). Ticks are the global
// event counter of the run that produced the value; they order events whose
// float timestamps collide, so backward-in-time constructions never have to
// break ties on equal doubles. Heights derived from later events are lower,
// hence the reversed tick comparison.
struct EventTime {
  double t = 0.0;
  std::uint64_t tick = 0;

  friend bool operator==(const EventTime& a, const EventTime& b) {
    return a.t == b.t && a.tick == b.tick;
  }
  friend bool operator!=(const EventTime& a, const EventTime& b) { return !(a == b); }
  friend bool operator<(const EventTime& a, const EventTime& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.tick > b.tick;
  }
  friend bool operator>(const EventTime& a, const EventTime& b) { return b < a; }
  friend bool operator<=(const EventTime& a, const EventTime& b) { return !(b < a); }
  friend bool operator>=(const EventTime& a, const EventTime& b) { return !(a < b); }
};

// Sentinel root height for forests whose components never merge.
inline constexpr EventTime kNeverMerged{
    std::numeric_limits<double>::infinity(),
    std::uint64_t{0x7fffffffffffffffULL}};

// Height of a dendrogram leaf. The maximal tick keeps leaves strictly below
// merge nodes whose timestamp is also 0 (events at the snapshot instant form
// zero-length branches distinguished by their tick).
inline constexpr std::uint64_t kLeafTick = std::numeric_limits<std::uint64_t>::max();
inline constexpr EventTime kLeafHeight{0.0, kLeafTick};

}  // namespace evogen
