#include "evogen/moran.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evogen/rng.hpp"

namespace evogen {

void MoranConfig::validate() const {
  torus.validate();
  kernel.validate();
  if (kernel.d != torus.d)
    throw std::invalid_argument("moran: kernel/torus dimension mismatch");
  if (n_per_site < 1) throw std::invalid_argument("moran: n_per_site must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("moran: gamma must be positive");
  if (!(t_max >= 0.0) || !std::isfinite(t_max))
    throw std::invalid_argument("moran: t_max must be finite nonnegative");
}

namespace {

// Fenwick tree over per-site pair weights m(m-1). Weights stay exact small
// integers, so prefix sums and totals are exact in double.
class Fenwick {
 public:
  explicit Fenwick(int n) : tree_(n + 1, 0.0), n_(n) {}

  void add(int i, double delta) {
    for (++i; i <= n_; i += i & -i) tree_[i] += delta;
  }

  double total() const {
    double acc = 0.0;
    for (int i = n_; i > 0; i -= i & -i) acc += tree_[i];
    return acc;
  }

  // Smallest index whose prefix sum exceeds target (target in [0, total)).
  int sample(double target) const {
    int pos = 0;
    int step = 1;
    while (2 * step <= n_) step *= 2;
    for (; step > 0; step /= 2)
      if (pos + step <= n_ && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    return std::min(pos, n_ - 1);
  }

 private:
  std::vector<double> tree_;
  int n_;
};

// Shared Gillespie loop; sinks observe initial state, events, and the end of
// the run. Per-site pair weights drive resampling; migration is the thinned
// walk over the non-zero wrapped offsets.
template <class Sink>
void run_moran_loop(const MoranConfig& cfg, Sink& sink) {
  cfg.validate();
  const GeoTorus& torus = cfg.torus;
  const int V = torus.volume();
  const int n = cfg.n_total();
  const ThinnedWalk walk = make_thinned_walk(cfg.kernel, torus);
  const int zero_site = torus.site_of(std::vector<int>(torus.d, 0));

  Rng rng = Rng::substream(cfg.seed, 0);

  std::vector<int> site_of(n);
  std::vector<std::vector<int>> members(V);
  std::vector<int> pos_in_site(n);
  for (int i = 0; i < n; ++i) {
    site_of[i] = cfg.placement == MoranConfig::Placement::origin
                     ? zero_site
                     : int(rng.below(std::uint64_t(V)));
    pos_in_site[i] = int(members[site_of[i]].size());
    members[site_of[i]].push_back(i);
  }
  sink.on_init(site_of);

  Fenwick pair_weight(V);
  for (int s = 0; s < V; ++s) {
    const double m = double(members[s].size());
    if (m >= 2.0) pair_weight.add(s, m * (m - 1.0));
  }

  const double mig_rate = double(n) * walk.p_move;
  double now = 0.0;
  std::uint64_t tick = 0;
  bool truncated = false;

  while (!sink.should_stop()) {
    const double res_rate = 0.5 * cfg.gamma * pair_weight.total();
    const double rate = res_rate + mig_rate;
    if (rate <= 0.0) {
      now = cfg.t_max;
      break;
    }
    const double wait = rng.exponential(rate);
    if (now + wait > cfg.t_max) {
      now = cfg.t_max;
      break;
    }
    if (tick >= cfg.max_events) {
      truncated = true;
      break;
    }
    now += wait;
    ++tick;

    if (rng.uniform01() * rate < res_rate) {
      int s = pair_weight.sample(rng.uniform01() * pair_weight.total());
      while (members[s].size() < 2) --s;  // float dust at the upper boundary
      const auto& mem = members[s];
      const std::uint64_t m = mem.size();
      const std::uint64_t i1 = rng.below(m);
      std::uint64_t i2 = rng.below(m - 1);
      if (i2 >= i1) ++i2;
      sink.on_resampling(now, tick, mem[i1], mem[i2]);
    } else {
      const int ind = int(rng.below(std::uint64_t(n)));
      const int from = site_of[ind];
      const int to = walk.step(from, rng.uniform01() * walk.p_move);

      auto& src_mem = members[from];
      const double mf = double(src_mem.size());
      const double mt = double(members[to].size());
      pair_weight.add(from, -2.0 * (mf - 1.0));
      pair_weight.add(to, 2.0 * mt);

      const int back = src_mem.back();
      src_mem[pos_in_site[ind]] = back;
      pos_in_site[back] = pos_in_site[ind];
      src_mem.pop_back();
      pos_in_site[ind] = int(members[to].size());
      members[to].push_back(ind);
      site_of[ind] = to;
      sink.on_migration(now, tick, ind, from, to);
    }
  }
  sink.on_done(now, tick, truncated);
}

struct LogSink {
  EventLog log;

  bool should_stop() const { return false; }
  void on_init(const std::vector<int>& sites) { log.initial_sites = sites; }
  void on_resampling(double t, std::uint64_t tick, int a, int b) {
    log.resampling.push_back({t, tick, std::int32_t(a), std::int32_t(b)});
  }
  void on_migration(double t, std::uint64_t tick, int ind, int from, int to) {
    log.migration.push_back({t, tick, std::int32_t(ind), std::int32_t(from), std::int32_t(to)});
  }
  void on_done(double t, std::uint64_t ticks, bool truncated) {
    log.t_end = t;
    log.total_events = ticks;
    log.truncated = truncated;
  }
};

// Pruned birth-node forest of the live population. Each node is the birth of
// a lineage segment; an arrow a -> b hangs a fresh node for b off a's current
// node. Nodes keep doubly linked child lists so pass-through nodes (one
// child, no live tip) can be spliced out eagerly: live size stays O(n).
class GenealogyTracker {
 public:
  explicit GenealogyTracker(int n) : cur_(n) {
    nodes_.reserve(std::size_t(4) * n + 8);
    for (int i = 0; i < n; ++i) {
      const int v = alloc({0.0, 0});
      nodes_[v].tip = i;
      nodes_[v].refs = 1;
      cur_[i] = v;
    }
    root_count_ = n;
  }

  void on_event(EventTime birth, int parent_ind, int child_ind) {
    const int na = cur_[parent_ind];
    const int nb = alloc(birth);
    nodes_[nb].tip = child_ind;
    nodes_[nb].refs = 1;
    attach(nb, na);
    const int old = cur_[child_ind];
    cur_[child_ind] = nb;
    nodes_[old].tip = -1;
    --nodes_[old].refs;
    on_ref_lost(old);
  }

  int root_count() const { return root_count_; }

  AtomicUmm extract(double T, const std::vector<int>& sites, int n_sites,
                    bool* censored) const {
    // Site-normalized measure: individual i weighs 1 / occupancy(site of i),
    // so every occupied site carries total mass 1.
    std::vector<int> occupancy(n_sites, 0);
    for (int s : sites) ++occupancy[s];
    UmmBuilder b;
    std::vector<int> tops;
    for (int v = 0; v < int(nodes_.size()); ++v)
      if (nodes_[v].refs >= 0 && nodes_[v].parent < 0)
        tops.push_back(build_subtree(b, v, T, sites, occupancy));
    if (censored) *censored = tops.size() > 1;
    if (tops.size() > 1) b.merge(tops, EventTime{T, 0});
    return b.build();
  }

 private:
  struct TNode {
    EventTime birth{};
    int parent = -1;
    int first_child = -1;
    int next_sib = -1;
    int prev_sib = -1;
    int refs = -1;  // children + live tip; -1 marks a freed slot
    int tip = -1;   // individual index, -1 if none
  };

  int alloc(EventTime birth) {
    int v;
    if (!free_.empty()) {
      v = free_.back();
      free_.pop_back();
    } else {
      v = int(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[v] = TNode{};
    nodes_[v].birth = birth;
    nodes_[v].refs = 0;
    return v;
  }

  void free_node(int v) {
    nodes_[v].refs = -1;
    free_.push_back(v);
  }

  void attach(int child, int parent) {
    TNode& c = nodes_[child];
    TNode& p = nodes_[parent];
    c.parent = parent;
    c.prev_sib = -1;
    c.next_sib = p.first_child;
    if (p.first_child >= 0) nodes_[p.first_child].prev_sib = child;
    p.first_child = child;
    ++p.refs;
  }

  void detach(int child, int parent) {
    TNode& c = nodes_[child];
    TNode& p = nodes_[parent];
    if (c.prev_sib >= 0)
      nodes_[c.prev_sib].next_sib = c.next_sib;
    else
      p.first_child = c.next_sib;
    if (c.next_sib >= 0) nodes_[c.next_sib].prev_sib = c.prev_sib;
    c.parent = -1;
    c.prev_sib = -1;
    c.next_sib = -1;
    --p.refs;
  }

  void on_ref_lost(int v) {
    while (v >= 0) {
      TNode& nd = nodes_[v];
      if (nd.refs == 0) {
        const int p = nd.parent;
        if (p >= 0)
          detach(v, p);
        else
          --root_count_;
        free_node(v);
        v = p;
        continue;
      }
      if (nd.refs == 1 && nd.tip < 0) {
        const int c = nd.first_child;
        const int p = nd.parent;
        // The child's clade diverged from p's segment when v branched off
        // it, so the splice inherits v's attachment time as merge height.
        nodes_[c].birth = nd.birth;
        detach(c, v);
        if (p >= 0) {
          detach(v, p);
          attach(c, p);
        }
        free_node(v);
      }
      break;
    }
  }

  int build_subtree(UmmBuilder& b, int v, double T, const std::vector<int>& sites,
                    const std::vector<int>& occupancy) const {
    const TNode& nd = nodes_[v];
    std::vector<std::pair<EventTime, int>> kids;
    for (int c = nd.first_child; c >= 0; c = nodes_[c].next_sib)
      kids.push_back({nodes_[c].birth, c});
    std::sort(kids.begin(), kids.end(),
              [](const auto& a, const auto& b2) { return b2.first < a.first; });

    int top = -1;
    if (nd.tip >= 0) {
      const double mass = 1.0 / double(occupancy[sites[nd.tip]]);
      top = b.add_leaf(std::uint64_t(nd.tip), mass, MarkVector{{sites[nd.tip], mass}});
    }
    for (auto& [birth, c] : kids) {
      const int sub = build_subtree(b, c, T, sites, occupancy);
      if (top < 0)
        top = sub;
      else
        top = b.merge({top, sub}, EventTime{T - birth.t, birth.tick});
    }
    return top;
  }

  std::vector<TNode> nodes_;
  std::vector<int> free_;
  std::vector<int> cur_;
  int root_count_ = 0;
};

struct TrackSink {
  GenealogyTracker tracker;
  std::vector<int> site_of;
  std::optional<double> fixation;
  bool stop_at_fixation = false;
  bool stop = false;
  double t_end = 0.0;
  std::uint64_t total_events = 0;
  bool truncated = false;

  TrackSink(int n, bool stop_at_fix)
      : tracker(n), stop_at_fixation(stop_at_fix) {}

  bool should_stop() const { return stop; }
  void on_init(const std::vector<int>& sites) { site_of = sites; }
  void on_resampling(double t, std::uint64_t tick, int a, int b) {
    tracker.on_event({t, tick}, a, b);
    if (!fixation && tracker.root_count() == 1) {
      fixation = t;
      if (stop_at_fixation) stop = true;
    }
  }
  void on_migration(double, std::uint64_t, int ind, int, int to) { site_of[ind] = to; }
  void on_done(double t, std::uint64_t ticks, bool trunc) {
    t_end = t;
    total_events = ticks;
    truncated = trunc;
  }
};

}  // namespace

EventLog simulate_moran(const MoranConfig& config) {
  LogSink sink;
  sink.log.config = config;
  run_moran_loop(config, sink);
  return std::move(sink.log);
}

TrackedRun simulate_moran_tracked(const MoranConfig& config, TrackOptions options) {
  TrackSink sink(config.n_total(), options.stop_at_fixation);
  run_moran_loop(config, sink);
  TrackedRun out;
  out.fixation_time = sink.fixation;
  out.final_sites = sink.site_of;
  out.t_end = sink.t_end;
  out.total_events = sink.total_events;
  out.truncated = sink.truncated;
  if (options.extract_snapshot)
    out.snapshot = sink.tracker.extract(out.t_end, sink.site_of, config.torus.volume(),
                                        &out.mrca_censored);
  return out;
}

namespace {

// Index range of resampling events with t in [h, t_snap].
std::pair<std::size_t, std::size_t> resampling_range(const EventLog& log, double h,
                                                     double t_snap) {
  if (h < 0.0 || h > t_snap || t_snap > log.t_end)
    throw std::invalid_argument("moran: query times outside [0, t_end]");
  const auto& ev = log.resampling;
  const auto lo = std::lower_bound(ev.begin(), ev.end(), h,
                                   [](const ResamplingEvent& e, double v) { return e.t < v; });
  const auto hi = std::upper_bound(ev.begin(), ev.end(), t_snap,
                                   [](double v, const ResamplingEvent& e) { return v < e.t; });
  return {std::size_t(lo - ev.begin()), std::size_t(hi - ev.begin())};
}

}  // namespace

int ancestor(const EventLog& log, int individual, double h, double t) {
  auto [lo, hi] = resampling_range(log, h, t);
  int cur = individual;
  for (std::size_t i = hi; i-- > lo;) {
    const auto& e = log.resampling[i];
    if (e.dst == cur) cur = e.src;
  }
  return cur;
}

std::vector<int> ancestors_all(const EventLog& log, double h, double t) {
  const int n = log.config.n_total();
  auto [lo, hi] = resampling_range(log, h, t);
  // Slot occupancy lists; an arrow moves all lineages of dst onto src in O(1).
  std::vector<int> head(n), tail(n), next(n, -1);
  for (int i = 0; i < n; ++i) head[i] = tail[i] = i;
  for (std::size_t i = hi; i-- > lo;) {
    const int s = log.resampling[i].src;
    const int d = log.resampling[i].dst;
    if (head[d] < 0) continue;
    if (head[s] < 0) {
      head[s] = head[d];
      tail[s] = tail[d];
    } else {
      next[tail[s]] = head[d];
      tail[s] = tail[d];
    }
    head[d] = -1;
  }
  std::vector<int> anc(n, -1);
  for (int p = 0; p < n; ++p)
    for (int x = head[p]; x >= 0; x = next[x]) anc[x] = p;
  return anc;
}

std::vector<int> descendants(const EventLog& log, int individual, double h, double t) {
  const std::vector<int> anc = ancestors_all(log, h, t);
  std::vector<int> out;
  for (int j = 0; j < int(anc.size()); ++j)
    if (anc[j] == individual) out.push_back(j);
  return out;
}

std::vector<int> sites_at(const EventLog& log, double t) {
  std::vector<int> sites = log.initial_sites;
  for (const MigrationEvent& e : log.migration) {
    if (e.t > t) break;
    sites[e.ind] = e.to;
  }
  return sites;
}

}  // namespace evogen
