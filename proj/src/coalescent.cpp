#include "evogen/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "evogen/rng.hpp"

namespace evogen {

LabeledPartition LabeledPartition::singletons(const std::vector<int>& sites) {
  LabeledPartition p;
  p.n = int(sites.size());
  p.blocks.reserve(sites.size());
  p.labels = sites;
  for (int i = 0; i < p.n; ++i) p.blocks.push_back({i});
  return p;
}

std::vector<int> LabeledPartition::block_of() const {
  std::vector<int> out(n, -1);
  for (int b = 0; b < int(blocks.size()); ++b)
    for (int e : blocks[b]) out[e] = b;
  return out;
}

void LabeledPartition::validate(int n_sites) const {
  if (n <= 0) throw std::invalid_argument("partition: empty ground set");
  if (blocks.empty() || blocks.size() != labels.size())
    throw std::invalid_argument("partition: blocks/labels mismatch");
  std::vector<bool> seen(n, false);
  int prev_least = -1;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw std::invalid_argument("partition: empty block");
    if (blocks[b].front() <= prev_least)
      throw std::invalid_argument("partition: blocks not sorted by least element");
    prev_least = blocks[b].front();
    int prev = -1;
    for (int e : blocks[b]) {
      if (e < 0 || e >= n || e <= prev)
        throw std::invalid_argument("partition: bad or unsorted element");
      if (seen[e]) throw std::invalid_argument("partition: repeated element");
      seen[e] = true;
      prev = e;
    }
    if (labels[b] < 0 || labels[b] >= n_sites)
      throw std::invalid_argument("partition: label outside torus");
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw std::invalid_argument("partition: missing element");
}

namespace {

int find_block(const std::vector<std::vector<int>>& blocks, int least) {
  const auto it = std::lower_bound(
      blocks.begin(), blocks.end(), least,
      [](const std::vector<int>& blk, int v) { return blk.front() < v; });
  if (it == blocks.end() || it->front() != least)
    throw std::invalid_argument("coalescent: event references unknown block");
  return int(it - blocks.begin());
}

void apply_event(LabeledPartition& part, const CoalescentEvent& e) {
  if (e.kind == CoalescentEvent::Kind::relabel) {
    part.labels[find_block(part.blocks, e.a)] = e.new_label;
    return;
  }
  const int ia = find_block(part.blocks, e.a);
  const int ib = find_block(part.blocks, e.b);
  std::vector<int> merged;
  merged.reserve(part.blocks[ia].size() + part.blocks[ib].size());
  std::merge(part.blocks[ia].begin(), part.blocks[ia].end(), part.blocks[ib].begin(),
             part.blocks[ib].end(), std::back_inserter(merged));
  part.blocks[ia] = std::move(merged);
  part.blocks.erase(part.blocks.begin() + ib);
  part.labels.erase(part.labels.begin() + ib);
}

}  // namespace

LabeledPartition CoalescentPath::state_at(double s) const {
  LabeledPartition part = initial;
  for (const CoalescentEvent& e : events) {
    if (e.time.t > s) break;
    apply_event(part, e);
  }
  return part;
}

int CoalescentPath::block_count_at(double s) const {
  int count = int(initial.blocks.size());
  for (const CoalescentEvent& e : events) {
    if (e.time.t > s) break;
    if (e.kind == CoalescentEvent::Kind::merge) --count;
  }
  return count;
}

std::optional<EventTime> CoalescentPath::time_to_k_blocks(int k) const {
  int count = int(initial.blocks.size());
  if (count == k) return kLeafHeight;
  for (const CoalescentEvent& e : events) {
    if (e.kind != CoalescentEvent::Kind::merge) continue;
    if (--count == k) return e.time;
  }
  return std::nullopt;
}

std::vector<std::vector<EventTime>> CoalescentPath::pair_coalescence() const {
  std::vector<std::vector<EventTime>> out(n, std::vector<EventTime>(n, kNeverMerged));
  for (int i = 0; i < n; ++i) out[i][i] = kLeafHeight;
  for (const auto& blk : initial.blocks)
    for (std::size_t i = 0; i < blk.size(); ++i)
      for (std::size_t j = i + 1; j < blk.size(); ++j)
        out[blk[i]][blk[j]] = out[blk[j]][blk[i]] = kLeafHeight;
  LabeledPartition part = initial;
  for (const CoalescentEvent& e : events) {
    if (e.kind != CoalescentEvent::Kind::merge) continue;
    const auto& a = part.blocks[find_block(part.blocks, e.a)];
    const auto& b = part.blocks[find_block(part.blocks, e.b)];
    for (int x : a)
      for (int y : b) out[x][y] = out[y][x] = e.time;
    apply_event(part, e);
  }
  return out;
}

CoalescentPath simulate_spatial_kingman(const CoalescentConfig& config) {
  config.torus.validate();
  config.kernel.validate();
  if (config.kernel.d != config.torus.d)
    throw std::invalid_argument("coalescent: kernel/torus dimension mismatch");
  if (!(config.gamma > 0.0) || !std::isfinite(config.horizon) || config.horizon < 0.0)
    throw std::invalid_argument("coalescent: bad gamma or horizon");
  const int V = config.torus.volume();
  config.initial.validate(V);

  const ThinnedWalk walk = make_thinned_walk(reverse(config.kernel), config.torus);
  Rng rng = Rng::substream(config.seed, 0);

  CoalescentPath path;
  path.n = config.initial.n;
  path.horizon = config.horizon;
  path.initial = config.initial;

  std::vector<int> least;
  std::vector<int> label = config.initial.labels;
  for (const auto& blk : config.initial.blocks) least.push_back(blk.front());

  double now = 0.0;
  std::uint64_t tick = 0;
  while (true) {
    const int B = int(least.size());
    std::vector<int> cnt(V, 0);
    for (int b = 0; b < B; ++b) ++cnt[label[b]];
    double pairs = 0.0;
    for (int s = 0; s < V; ++s) pairs += double(cnt[s]) * (cnt[s] - 1);
    const double merge_rate = 0.5 * config.gamma * pairs;
    const double relabel_rate = double(B) * walk.p_move;
    const double rate = merge_rate + relabel_rate;
    if (rate <= 0.0) break;
    now += rng.exponential(rate);
    if (now > config.horizon) break;
    ++tick;

    CoalescentEvent ev;
    ev.time = {now, tick};
    if (rng.uniform01() * rate < merge_rate) {
      double target = rng.uniform01() * pairs;
      int site = -1;
      for (int s = 0; s < V; ++s) {
        const double w = double(cnt[s]) * (cnt[s] - 1);
        if (target < w) {
          site = s;
          break;
        }
        target -= w;
      }
      if (site < 0)  // float dust at the upper boundary
        for (int s = V - 1; s >= 0; --s)
          if (cnt[s] >= 2) {
            site = s;
            break;
          }
      std::vector<int> here;
      for (int b = 0; b < B; ++b)
        if (label[b] == site) here.push_back(b);
      const std::uint64_t i1 = rng.below(here.size());
      std::uint64_t i2 = rng.below(here.size() - 1);
      if (i2 >= i1) ++i2;
      const int ba = here[i1], bb = here[i2];
      ev.kind = CoalescentEvent::Kind::merge;
      ev.a = std::min(least[ba], least[bb]);
      ev.b = std::max(least[ba], least[bb]);
      const int keep = least[ba] < least[bb] ? ba : bb;
      const int drop = keep == ba ? bb : ba;
      least.erase(least.begin() + drop);
      label.erase(label.begin() + drop);
    } else {
      const int b = int(rng.below(std::uint64_t(B)));
      const int to = walk.step(label[b], rng.uniform01() * walk.p_move);
      ev.kind = CoalescentEvent::Kind::relabel;
      ev.a = least[b];
      ev.new_label = to;
      label[b] = to;
    }
    path.events.push_back(ev);
  }
  return path;
}

CoalescentPath coalescent_from_event_log(const EventLog& log, double T) {
  if (T < 0.0 || T > log.t_end)
    throw std::invalid_argument("coalescent: snapshot outside [0, t_end]");
  const int n = log.config.n_total();

  CoalescentPath path;
  path.n = n;
  path.horizon = T;
  path.initial = LabeledPartition::singletons(sites_at(log, T));

  // block id == least element of the block riding the slot; -1 empty slot.
  std::vector<int> block_at(n);
  for (int i = 0; i < n; ++i) block_at[i] = i;

  const auto& res = log.resampling;
  const auto& mig = log.migration;
  // Last indices with event time <= T (ticks at equal t all belong to the past).
  std::size_t ri = std::size_t(
      std::upper_bound(res.begin(), res.end(), T,
                       [](double v, const ResamplingEvent& e) { return v < e.t; }) -
      res.begin());
  std::size_t mi = std::size_t(
      std::upper_bound(mig.begin(), mig.end(), T,
                       [](double v, const MigrationEvent& e) { return v < e.t; }) -
      mig.begin());

  while (ri > 0 || mi > 0) {
    const bool take_res =
        mi == 0 || (ri > 0 && res[ri - 1].tick > mig[mi - 1].tick);
    if (take_res) {
      const ResamplingEvent& e = res[--ri];
      const int bd = block_at[e.dst];
      if (bd < 0) continue;
      const int bs = block_at[e.src];
      if (bs < 0) {
        block_at[e.src] = bd;  // within-site hop, invisible to the partition
        block_at[e.dst] = -1;
        continue;
      }
      CoalescentEvent ev;
      ev.time = {T - e.t, e.tick};
      ev.kind = CoalescentEvent::Kind::merge;
      ev.a = std::min(bs, bd);
      ev.b = std::max(bs, bd);
      path.events.push_back(ev);
      block_at[e.src] = ev.a;
      block_at[e.dst] = -1;
    } else {
      const MigrationEvent& e = mig[--mi];
      const int b = block_at[e.ind];
      if (b < 0) continue;
      CoalescentEvent ev;
      ev.time = {T - e.t, e.tick};
      ev.kind = CoalescentEvent::Kind::relabel;
      ev.a = b;
      ev.new_label = e.from;
      path.events.push_back(ev);
    }
  }
  return path;
}

AtomicUmm umm_from_path(const CoalescentPath& path) {
  UmmBuilder b;
  std::vector<int> least;
  std::vector<int> node;
  // Site-normalized measure: every occupied site carries total mass 1, each
  // block contributes its share of the individuals located there.
  std::map<int, int> site_count;
  for (std::size_t i = 0; i < path.initial.blocks.size(); ++i)
    site_count[path.initial.labels[i]] += int(path.initial.blocks[i].size());
  for (std::size_t i = 0; i < path.initial.blocks.size(); ++i) {
    const auto& blk = path.initial.blocks[i];
    const int site = path.initial.labels[i];
    const double mass = double(blk.size()) / double(site_count[site]);
    least.push_back(blk.front());
    node.push_back(b.add_leaf(std::uint64_t(blk.front()), mass,
                              MarkVector{{site, mass}}));
  }
  for (const CoalescentEvent& e : path.events) {
    if (e.kind != CoalescentEvent::Kind::merge) continue;
    const auto ia = std::lower_bound(least.begin(), least.end(), e.a) - least.begin();
    const auto ib = std::lower_bound(least.begin(), least.end(), e.b) - least.begin();
    node[ia] = b.merge({node[ia], node[ib]}, e.time);
    least.erase(least.begin() + ib);
    node.erase(node.begin() + ib);
  }
  if (node.size() > 1) b.merge(node, EventTime{path.horizon, 0});
  return b.build();
}

AtomicUmm genealogy_snapshot(const EventLog& log, double T) {
  return umm_from_path(coalescent_from_event_log(log, T));
}

std::optional<std::vector<double>> block_frequencies_at_tau(const CoalescentPath& path,
                                                            int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("block_frequencies_at_tau: k must be >= 1");
  if (!path.time_to_k_blocks(k)) return std::nullopt;
  LabeledPartition part = path.initial;
  for (const CoalescentEvent& e : path.events) {
    if (int(part.blocks.size()) == k) break;
    apply_event(part, e);
  }
  std::vector<double> f;
  f.reserve(part.blocks.size());
  for (const auto& blk : part.blocks) f.push_back(double(blk.size()) / path.n);
  Rng rng = Rng::substream(seed, 0);
  for (std::size_t i = f.size(); i > 1; --i)
    std::swap(f[i - 1], f[rng.below(i)]);
  return f;
}

}  // namespace evogen
