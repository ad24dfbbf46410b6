#include "evogen/umm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "evogen/rng.hpp"

namespace evogen {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double AtomicUmm::total_mass() const {
  double m = 0.0;
  for (int idx : leaves_) m += nodes_[idx].mass;
  return m;
}

EventTime AtomicUmm::root_height() const {
  EventTime h = kLeafHeight;
  for (int idx : roots_) h = std::max(h, nodes_[idx].height);
  return h;
}

EventTime AtomicUmm::distance(int leaf_a, int leaf_b) const {
  if (leaf_a == leaf_b) return kLeafHeight;
  int ia = leaves_[leaf_a];
  int ib = leaves_[leaf_b];
  while (ia != ib) {
    if (depth_[ia] > depth_[ib]) {
      ia = nodes_[ia].parent;
    } else if (depth_[ib] > depth_[ia]) {
      ib = nodes_[ib].parent;
    } else {
      ia = nodes_[ia].parent;
      ib = nodes_[ib].parent;
    }
    if (ia < 0 || ib < 0) return kNeverMerged;
  }
  return nodes_[ia].height;
}

std::vector<std::vector<EventTime>> AtomicUmm::distance_matrix() const {
  const int n = leaf_count();
  std::vector<std::vector<EventTime>> out(n, std::vector<EventTime>(n, kLeafHeight));
  // One upward sweep per leaf: record its ancestor set, then resolve every
  // other leaf at the first common ancestor.
  std::vector<int> stamp(nodes_.size(), -1);
  for (int i = 0; i < n; ++i) {
    for (int cur = leaves_[i]; cur >= 0; cur = nodes_[cur].parent) stamp[cur] = i;
    for (int j = i + 1; j < n; ++j) {
      EventTime d = kNeverMerged;
      for (int cur = leaves_[j]; cur >= 0; cur = nodes_[cur].parent) {
        if (stamp[cur] == i) {
          d = nodes_[cur].height;
          break;
        }
      }
      out[i][j] = d;
      out[j][i] = d;
    }
  }
  return out;
}

void AtomicUmm::validate() const {
  require(!nodes_.empty(), "umm: empty dendrogram");
  require(!leaves_.empty(), "umm: no leaves");
  std::unordered_set<std::uint64_t> ids;
  int n_marked = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& nd = nodes_[i];
    if (nd.children.empty()) {
      require(nd.height == kLeafHeight, "umm: leaf not at height 0");
      require(nd.mass > 0.0, "umm: leaf with nonpositive mass");
      require(ids.insert(nd.leaf_id).second, "umm: duplicate leaf id");
      if (!nd.marks.empty()) {
        ++n_marked;
        double sum = 0.0;
        int prev_site = -1;
        for (auto& [site, g] : nd.marks) {
          require(site > prev_site, "umm: marks not sorted by site");
          require(g > 0.0, "umm: nonpositive mark mass");
          prev_site = site;
          sum += g;
        }
        require(std::abs(sum - nd.mass) <= 1e-9 * std::max(1.0, nd.mass),
                "umm: mark masses do not sum to leaf mass");
      }
    } else {
      require(nd.children.size() >= 2, "umm: internal node with < 2 children");
      require(std::isfinite(nd.height.t) && nd.height.t >= 0.0,
              "umm: merge height not finite nonnegative");
      for (int c : nd.children) {
        require(c >= 0 && c < int(i), "umm: child index out of order");
        require(nodes_[c].parent == int(i), "umm: broken parent link");
        require(nodes_[c].height < nd.height, "umm: heights not increasing");
      }
    }
    if (nd.parent < 0) {
      require(std::find(roots_.begin(), roots_.end(), int(i)) != roots_.end(),
              "umm: orphan node missing from roots");
    }
  }
  require(n_marked == 0 || n_marked == int(leaves_.size()),
          "umm: mixed marked and unmarked leaves");
}

int UmmBuilder::add_leaf(std::uint64_t id, double mass, MarkVector marks) {
  AtomicUmm::Node nd;
  nd.height = kLeafHeight;
  nd.leaf_id = id;
  nd.mass = mass;
  nd.marks = std::move(marks);
  nodes_.push_back(std::move(nd));
  leaves_.push_back(int(nodes_.size()) - 1);
  return int(nodes_.size()) - 1;
}

int UmmBuilder::merge(const std::vector<int>& children, EventTime height) {
  require(children.size() >= 2, "umm: merge needs >= 2 children");
  AtomicUmm::Node nd;
  nd.height = height;
  nd.children = children;
  for (int c : children) {
    require(c >= 0 && c < int(nodes_.size()), "umm: merge child out of range");
    require(nodes_[c].parent < 0, "umm: merge child already has a parent");
    nodes_[c].parent = int(nodes_.size());
    nd.mass += nodes_[c].mass;
  }
  nodes_.push_back(std::move(nd));
  return int(nodes_.size()) - 1;
}

AtomicUmm UmmBuilder::build() {
  AtomicUmm u;
  u.nodes_ = std::move(nodes_);
  u.leaves_ = std::move(leaves_);
  for (std::size_t i = 0; i < u.nodes_.size(); ++i)
    if (u.nodes_[i].parent < 0) u.roots_.push_back(int(i));
  u.depth_.assign(u.nodes_.size(), 0);
  for (std::size_t i = u.nodes_.size(); i-- > 0;)
    for (int c : u.nodes_[i].children) u.depth_[c] = u.depth_[i] + 1;
  u.marked_ = !u.nodes_[u.leaves_.front()].marks.empty();
  u.validate();
  nodes_.clear();
  leaves_.clear();
  return u;
}

namespace {

// Memoized maximal ancestor whose height stays within the ball radius.
int ball_root(const AtomicUmm& u, int node, double h, bool closed,
              std::vector<int>& memo) {
  if (memo[node] >= 0) return memo[node];
  int p = u.node(node).parent;
  int r = node;
  if (p >= 0) {
    double ph = u.node(p).height.t;
    if (closed ? (ph <= h) : (ph < h)) r = ball_root(u, p, h, closed, memo);
  }
  memo[node] = r;
  return r;
}

}  // namespace

std::vector<Ball> ball_decomposition(const AtomicUmm& u, double h, bool closed) {
  require(h >= 0.0, "ball_decomposition: negative radius");
  std::vector<int> memo(u.node_count(), -1);
  std::vector<Ball> out;
  std::unordered_map<int, int> root_to_ball;
  for (int pos = 0; pos < u.leaf_count(); ++pos) {
    int r = ball_root(u, u.leaf_nodes()[pos], h, closed, memo);
    auto [it, fresh] = root_to_ball.try_emplace(r, int(out.size()));
    if (fresh) {
      out.emplace_back();
      out.back().representative = u.leaf(pos).leaf_id;
    }
    Ball& b = out[it->second];
    b.leaves.push_back(pos);
    b.mass += u.leaf(pos).mass;
  }
  if (u.marked()) {
    for (Ball& b : out) {
      std::map<int, double> agg;
      for (int pos : b.leaves)
        for (auto& [site, g] : u.leaf(pos).marks) agg[site] += g;
      b.marks.assign(agg.begin(), agg.end());
    }
  }
  return out;
}

AtomicUmm cut_trunk(const AtomicUmm& u, double h, bool subtract) {
  require(h >= 0.0 && std::isfinite(h), "cut_trunk: bad height");
  std::vector<Ball> balls = ball_decomposition(u, h, /*closed=*/true);

  UmmBuilder b;
  // Ball roots (maximal nodes at height <= h) collapse to fresh leaves.
  std::unordered_map<int, int> node_to_new;  // original -> builder index
  {
    std::vector<int> memo(u.node_count(), -1);
    for (const Ball& ball : balls) {
      int r = ball_root(u, u.leaf_nodes()[ball.leaves.front()], h, true, memo);
      node_to_new[r] = b.add_leaf(ball.representative, ball.mass, ball.marks);
    }
  }
  // Surviving internal nodes keep their child lists, with collapsed subtrees
  // swapped for the new leaves. Children precede parents in index order.
  for (int i = 0; i < u.node_count(); ++i) {
    const auto& nd = u.node(i);
    if (nd.children.empty() || nd.height.t <= h) continue;
    std::vector<int> kids;
    kids.reserve(nd.children.size());
    for (int c : nd.children) kids.push_back(node_to_new.at(c));
    EventTime height = subtract ? EventTime{nd.height.t - h, nd.height.tick} : nd.height;
    node_to_new[i] = b.merge(kids, height);
  }
  return b.build();
}

FamilyVector family_size_decomposition(const AtomicUmm& u, double h) {
  std::vector<Ball> balls = ball_decomposition(u, h, /*closed=*/true);
  FamilyVector f;
  f.reserve(balls.size());
  for (const Ball& b : balls) f.push_back(b.mass);
  std::sort(f.begin(), f.end(), std::greater<double>());
  return f;
}

double dS(const FamilyVector& a, const FamilyVector& b) {
  double acc = 0.0;
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    double x = i < a.size() ? a[i] : 0.0;
    double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return acc;
}

FamilyVector ord(const AtomicUmm& u) { return family_size_decomposition(u, 0.0); }

double DistanceMatrixDistribution::mass_all_leq(double r) const {
  double acc = 0.0;
  for (const NuSupportPoint& p : support) {
    bool ok = true;
    for (const EventTime& d : p.distances)
      if (d.t > r) {
        ok = false;
        break;
      }
    if (ok) acc += p.mass;
  }
  return acc;
}

namespace {

struct NuAtom {
  int leaf = 0;
  int mark = -1;
  double mass = 0.0;
};

std::vector<NuAtom> nu_atoms(const AtomicUmm& u) {
  std::vector<NuAtom> atoms;
  for (int pos = 0; pos < u.leaf_count(); ++pos) {
    const auto& lf = u.leaf(pos);
    if (u.marked()) {
      for (auto& [site, g] : lf.marks) atoms.push_back({pos, site, g});
    } else {
      atoms.push_back({pos, -1, lf.mass});
    }
  }
  return atoms;
}

using NuKey = std::pair<std::vector<EventTime>, std::vector<int>>;

DistanceMatrixDistribution finish_nu(const AtomicUmm& u, int k,
                                     const std::map<NuKey, double>& agg) {
  DistanceMatrixDistribution out;
  out.k = k;
  out.marked = u.marked();
  for (auto& [key, mass] : agg) {
    NuSupportPoint p;
    p.distances = key.first;
    p.marks = key.second;
    p.mass = mass;
    out.total_mass += mass;
    out.support.push_back(std::move(p));
  }
  return out;
}

NuKey nu_key(const AtomicUmm& u, const std::vector<std::vector<EventTime>>& dm,
             const std::vector<NuAtom>& atoms, const std::vector<int>& idx) {
  const int k = int(idx.size());
  NuKey key;
  key.first.reserve(std::size_t(k) * (k - 1) / 2);
  key.second.reserve(k);
  for (int a = 0; a < k; ++a)
    for (int bpos = a + 1; bpos < k; ++bpos) {
      const NuAtom& x = atoms[idx[a]];
      const NuAtom& y = atoms[idx[bpos]];
      key.first.push_back(x.leaf == y.leaf ? kLeafHeight : dm[x.leaf][y.leaf]);
    }
  for (int a = 0; a < k; ++a)
    key.second.push_back(u.marked() ? atoms[idx[a]].mark : -1);
  return key;
}

}  // namespace

DistanceMatrixDistribution nu_k(const AtomicUmm& u, int k, std::size_t budget) {
  require(k >= 1, "nu_k: k must be >= 1");
  std::vector<NuAtom> atoms = nu_atoms(u);
  double tuples = 1.0;
  for (int j = 0; j < k; ++j) tuples *= double(atoms.size());
  if (tuples > double(budget))
    throw std::length_error("nu_k: atom^k tuples exceed budget; use nu_k_sampled");

  auto dm = u.distance_matrix();
  std::map<NuKey, double> agg;
  std::vector<int> idx(k, 0);
  while (true) {
    double mass = 1.0;
    for (int a = 0; a < k; ++a) mass *= atoms[idx[a]].mass;
    agg[nu_key(u, dm, atoms, idx)] += mass;
    int pos = k - 1;
    while (pos >= 0 && ++idx[pos] == int(atoms.size())) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return finish_nu(u, k, agg);
}

DistanceMatrixDistribution nu_k_sampled(const AtomicUmm& u, int k, std::size_t n_draws,
                                        std::uint64_t seed) {
  require(k >= 1 && n_draws > 0, "nu_k_sampled: bad arguments");
  std::vector<NuAtom> atoms = nu_atoms(u);
  std::vector<double> weights;
  weights.reserve(atoms.size());
  double total = 0.0;
  for (const NuAtom& a : atoms) {
    weights.push_back(a.mass);
    total += a.mass;
  }
  double tuple_mass = std::pow(total, k);

  auto dm = u.distance_matrix();
  Rng rng = Rng::substream(seed, 0);
  std::map<NuKey, double> agg;
  std::vector<int> idx(k, 0);
  const double unit = tuple_mass / double(n_draws);
  for (std::size_t s = 0; s < n_draws; ++s) {
    for (int a = 0; a < k; ++a) idx[a] = int(rng.discrete(weights));
    agg[nu_key(u, dm, atoms, idx)] += unit;
  }
  return finish_nu(u, k, agg);
}

double nu2_mass_below(const AtomicUmm& u, double T) {
  auto dm = u.distance_matrix();
  double acc = 0.0;
  for (int i = 0; i < u.leaf_count(); ++i)
    for (int j = 0; j < u.leaf_count(); ++j)
      if (dm[i][j].t <= T) acc += u.leaf(i).mass * u.leaf(j).mass;
  return acc;
}

void FiniteMetricSpace::validate(bool check_triangle, double tol) const {
  require(int(d.size()) == n * n, "metric: wrong matrix size");
  for (int i = 0; i < n; ++i) {
    require(dist(i, i) == 0.0, "metric: nonzero diagonal");
    for (int j = 0; j < n; ++j) {
      require(dist(i, j) >= 0.0, "metric: negative distance");
      require(std::abs(dist(i, j) - dist(j, i)) <= tol, "metric: asymmetric");
    }
  }
  if (check_triangle)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          require(dist(i, j) <= dist(i, l) + dist(l, j) + tol,
                  "metric: triangle inequality violated");
}

std::vector<double> atom_square_measure(const std::vector<double>& masses) {
  std::vector<double> out(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) out[i] = masses[i] * masses[i];
  return out;
}

double atomicity_functional(const FiniteMetricSpace& space,
                            const std::vector<double>& masses, double eps) {
  require(eps > 0.0, "atomicity_functional: eps must be positive");
  require(int(masses.size()) == space.n, "atomicity_functional: size mismatch");
  double acc = 0.0;
  for (int i = 0; i < space.n; ++i)
    for (int j = 0; j < space.n; ++j) {
      if (i == j) continue;
      double psi = 1.0 - space.dist(i, j) / eps;
      if (psi > 0.0) acc += psi * masses[i] * masses[j];
    }
  return acc;
}

}  // namespace evogen
