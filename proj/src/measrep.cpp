#include "evogen/measrep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "evogen/rng.hpp"

namespace evogen {

int MeasureAtom::total_count() const {
  int acc = 0;
  for (auto& [site, c] : site_counts) acc += c;
  return acc;
}

double atom_mass(const MeasureAtom& atom, const std::vector<int>& occupancy) {
  double acc = 0.0;
  for (auto& [site, c] : atom.site_counts) acc += double(c) / double(occupancy[site]);
  return acc;
}

const MeasureSnapshot& AtomicMeasurePath::at(double h) const {
  if (h < 0.0 || snaps.empty())
    throw std::invalid_argument("measrep: offset outside path");
  const auto it = std::upper_bound(
      snaps.begin(), snaps.end(), h,
      [](double v, const MeasureSnapshot& s) { return v < s.h.t; });
  if (it == snaps.begin())
    throw std::invalid_argument("measrep: offset below first snapshot");
  return *(it - 1);
}

namespace {

// Forward population state: the time-T ancestor and current site of every
// slot. Resampling rewires anc (the offspring inherits the parent's ancestor
// and keeps the dead slot's site); migration moves a slot between sites.
struct ForwardState {
  std::vector<int> anc;
  std::vector<int> site;
  std::vector<int> occupancy;
};

MeasureSnapshot materialize(const ForwardState& st,
                            const std::vector<std::uint64_t>& labels, EventTime h) {
  const int n = int(st.anc.size());
  MeasureSnapshot snap;
  snap.h = h;
  snap.occupancy = st.occupancy;
  // Bucketing slots in ascending order keeps each member list sorted.
  std::vector<std::vector<int>> bucket(n);
  for (int j = 0; j < n; ++j) bucket[st.anc[j]].push_back(j);
  for (int rep = 0; rep < n; ++rep) {
    if (bucket[rep].empty()) continue;
    MeasureAtom atom;
    atom.label = labels[rep];
    atom.representative = rep;
    atom.members = std::move(bucket[rep]);
    std::map<int, int> counts;
    for (int m : atom.members) ++counts[st.site[m]];
    atom.site_counts.assign(counts.begin(), counts.end());
    snap.atoms.push_back(std::move(atom));
  }
  return snap;
}

}  // namespace

AtomicMeasurePath build_measure_representation(const EventLog& log, double T,
                                               std::uint64_t label_seed,
                                               const std::vector<double>& grid) {
  if (!(T >= 0.0) || !(T <= log.t_end))
    throw std::invalid_argument("measrep: anchor outside the log");
  const int n = log.config.n_total();
  if (n <= 0) throw std::invalid_argument("measrep: empty population");

  AtomicMeasurePath path;
  path.T = T;
  path.t_end = log.t_end;
  path.n = n;
  path.n_sites = int(log.config.torus.volume());
  path.label_seed = label_seed;

  // One uniform label per individual alive at T. splitmix64 is a bijection
  // of its counter, so a single chain never repeats a label.
  std::vector<std::uint64_t> labels(n);
  std::uint64_t label_state =
      derive_seed(label_seed, std::bit_cast<std::uint64_t>(T));
  for (auto& v : labels) v = splitmix64(label_state);

  ForwardState st;
  st.anc.resize(n);
  for (int j = 0; j < n; ++j) st.anc[j] = j;
  st.site = sites_at(log, T);
  st.occupancy.assign(path.n_sites, 0);
  for (int s : st.site) ++st.occupancy[s];

  // Arrows exactly at the anchor belong to its past: A_T(., T) applies them,
  // in tick order. Migrations at T are already folded into sites_at.
  auto res = log.resampling.begin();
  for (; res != log.resampling.end() && res->t <= T; ++res)
    if (res->t == T) st.anc[res->dst] = st.anc[res->src];
  auto mig = log.migration.begin();
  while (mig != log.migration.end() && mig->t <= T) ++mig;

  const bool use_grid = !grid.empty();
  std::vector<double> hs;
  if (use_grid) {
    hs = grid;
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    if (hs.front() < 0.0 || hs.back() > log.t_end - T)
      throw std::invalid_argument("measrep: grid outside [0, t_end - T]");
  } else {
    path.snaps.push_back(materialize(st, labels, kLeafHeight));
  }

  // Ticks are global, so merging the two sorted streams by tick replays the
  // run in event order. A snapshot at offset h sees every event with
  // timestamp <= T + h, all ticks included.
  std::size_t gi = 0;
  while (res != log.resampling.end() || mig != log.migration.end()) {
    const bool take_res =
        mig == log.migration.end() ||
        (res != log.resampling.end() && res->tick < mig->tick);
    const double t = take_res ? res->t : mig->t;
    const std::uint64_t tick = take_res ? res->tick : mig->tick;
    const double eh = t - T;
    if (use_grid)
      while (gi < hs.size() && hs[gi] < eh)
        path.snaps.push_back(materialize(st, labels, EventTime{hs[gi++], 0}));
    bool changed;
    if (take_res) {
      changed = st.anc[res->src] != st.anc[res->dst];
      st.anc[res->dst] = st.anc[res->src];
      ++res;
    } else {
      --st.occupancy[mig->from];
      ++st.occupancy[mig->to];
      st.site[mig->ind] = mig->to;
      changed = true;
      ++mig;
    }
    if (!use_grid && changed)
      path.snaps.push_back(materialize(st, labels, EventTime{eh, tick}));
  }
  if (use_grid)
    while (gi < hs.size())
      path.snaps.push_back(materialize(st, labels, EventTime{hs[gi++], 0}));
  return path;
}

void check_smr(const AtomicMeasurePath& path) {
  auto fail = [](const char* msg) { throw std::runtime_error(msg); };
  if (path.snaps.empty()) fail("smr: empty path");
  if (path.n <= 0) fail("smr: empty population");
  if (path.n_sites <= 0) fail("smr: empty geography");

  // A label is bound to one ancestor slot at the anchor and never moves.
  std::unordered_map<std::uint64_t, int> rep_of_label;
  std::unordered_map<int, std::uint64_t> label_of_rep;
  for (std::size_t s = 0; s < path.snaps.size(); ++s) {
    const MeasureSnapshot& snap = path.snaps[s];
    if (s > 0 && !(path.snaps[s - 1].h < snap.h)) fail("smr: offsets not increasing");
    if (snap.atoms.empty()) fail("smr: empty snapshot");
    if (int(snap.occupancy.size()) != path.n_sites) fail("smr: bad occupancy size");

    std::vector<int> site_sum(path.n_sites, 0);
    std::vector<bool> seen(path.n, false);
    int covered = 0;
    int prev_rep = -1;
    for (const MeasureAtom& a : snap.atoms) {
      if (a.representative <= prev_rep || a.representative >= path.n)
        fail("smr: atoms not ordered by representative");
      prev_rep = a.representative;
      const auto [it, fresh] = rep_of_label.try_emplace(a.label, a.representative);
      if (!fresh && it->second != a.representative) fail("smr: label switched ancestor");
      const auto [jt, fresh2] = label_of_rep.try_emplace(a.representative, a.label);
      if (!fresh2 && jt->second != a.label) fail("smr: ancestor switched label");
      if (a.members.empty()) fail("smr: empty atom");
      int prev = -1;
      for (int m : a.members) {
        if (m < 0 || m >= path.n || m <= prev) fail("smr: bad member list");
        if (seen[m]) fail("smr: member in two atoms");
        seen[m] = true;
        prev = m;
        ++covered;
      }
      int count = 0;
      int prev_site = -1;
      for (auto& [site, c] : a.site_counts) {
        if (site <= prev_site || site >= path.n_sites) fail("smr: bad site");
        if (c <= 0) fail("smr: nonpositive count");
        prev_site = site;
        site_sum[site] += c;
        count += c;
      }
      if (count != int(a.members.size())) fail("smr: counts disagree with members");
    }
    if (covered != path.n) fail("smr: snapshot does not cover the population");
    // Exact integer mass conservation, site by site.
    if (site_sum != snap.occupancy) fail("smr: site masses not conserved");
  }

  // Supports shrink: an ancestor with no descendants never regains any, so
  // each snapshot's atom set embeds into the previous one.
  for (std::size_t s = 1; s < path.snaps.size(); ++s) {
    const auto& prev = path.snaps[s - 1].atoms;
    const auto& cur = path.snaps[s].atoms;
    std::size_t i = 0;
    for (const MeasureAtom& a : cur) {
      while (i < prev.size() && prev[i].representative < a.representative) ++i;
      if (i == prev.size() || prev[i].representative != a.representative)
        fail("smr: support not nested");
    }
  }
}

std::optional<EventTime> mrca_time(const AtomicMeasurePath& path) {
  for (const MeasureSnapshot& snap : path.snaps)
    if (snap.atoms.size() == 1) return snap.h;
  return std::nullopt;
}

double pair_moment(const AtomicMeasurePath& path, double h) {
  const MeasureSnapshot& snap = path.at(h);
  // Occupied sites carry unit mass each; dividing by their count turns the
  // snapshot into a probability measure (exact: the divisor is an integer).
  int occupied = 0;
  for (int c : snap.occupancy)
    if (c > 0) ++occupied;
  double acc = 0.0;
  for (const MeasureAtom& a : snap.atoms) {
    const double mass = atom_mass(a, snap.occupancy) / occupied;
    acc += mass * mass;
  }
  return acc;
}

FamilyVector family_sizes(const MeasureSnapshot& snap) {
  FamilyVector f;
  f.reserve(snap.atoms.size());
  for (const MeasureAtom& a : snap.atoms)
    f.push_back(atom_mass(a, snap.occupancy));
  std::sort(f.begin(), f.end(), std::greater<double>());
  return f;
}

double wf_absorption_expectation(int n) {
  if (n < 2) throw std::invalid_argument("wf_absorption_expectation: n must be >= 2");
  return 2.0 * (n - 1) * std::log(double(n) / (n - 1));
}

}  // namespace evogen
