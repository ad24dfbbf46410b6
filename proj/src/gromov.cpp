#include "evogen/gromov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "evogen/prohorov.hpp"

namespace evogen {

namespace {

struct GpAtom {
  int leaf = 0;
  int mark = -1;  // -1 when unmarked
  double mass = 0.0;
};

std::vector<GpAtom> gp_atoms(const AtomicUmm& u) {
  std::vector<GpAtom> atoms;
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

// Distance law of nu^2 on the unmarked projection: (value, mass) pairs over
// ordered leaf pairs including the diagonal.
std::vector<std::pair<double, double>> nu2_law(const AtomicUmm& u) {
  auto dm = u.distance_matrix();
  std::map<double, double> agg;
  for (int i = 0; i < u.leaf_count(); ++i)
    for (int j = 0; j < u.leaf_count(); ++j)
      agg[dm[i][j].t] += u.leaf(i).mass * u.leaf(j).mass;
  return {agg.begin(), agg.end()};
}

// |a-b| treating two never-merged (infinite) heights as equal.
double height_diff(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return 0.0;
  return std::abs(a - b);
}

struct Side {
  const AtomicUmm* u = nullptr;
  std::vector<std::vector<double>> dist;  // leaf distances, .t projection
  std::vector<GpAtom> atoms;
  double total = 0.0;
  double max_finite = 0.0;
};

Side make_side(const AtomicUmm& u) {
  Side s;
  s.u = &u;
  auto dm = u.distance_matrix();
  s.dist.assign(dm.size(), {});
  for (std::size_t i = 0; i < dm.size(); ++i) {
    s.dist[i].resize(dm.size());
    for (std::size_t j = 0; j < dm.size(); ++j) {
      s.dist[i][j] = dm[i][j].t;
      if (std::isfinite(s.dist[i][j]))
        s.max_finite = std::max(s.max_finite, s.dist[i][j]);
    }
  }
  s.atoms = gp_atoms(u);
  s.total = u.total_mass();
  return s;
}

// Distortion of map on the pairs assigned so far is tracked incrementally by
// the search; this computes it for a complete map.
double map_distortion(const Side& x, const Side& y, const std::vector<int>& phi) {
  double d = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = i + 1; j < phi.size(); ++j)
      d = std::max(d, height_diff(x.dist[i][j], y.dist[phi[i]][phi[j]]));
  return d;
}

// Checks whether pushing mu_X through phi reproduces mu_Y exactly, per leaf
// class and (for marked spaces) per site.
bool mass_exact(const Side& x, const Side& y, const std::vector<int>& phi, double tol) {
  std::map<std::pair<int, int>, double> pushed;  // (y leaf, site) -> mass
  for (const GpAtom& a : x.atoms) pushed[{phi[a.leaf], a.mark}] += a.mass;
  std::map<std::pair<int, int>, double> target;
  for (const GpAtom& a : y.atoms) target[{a.leaf, a.mark}] += a.mass;
  if (pushed.size() != target.size()) return false;
  for (auto& [key, m] : target) {
    auto it = pushed.find(key);
    if (it == pushed.end() || std::abs(it->second - m) > tol) return false;
  }
  return true;
}

// Prohorov distance between mu_X and mu_Y on the union space glued along phi
// with gap D/2; marks contribute a discrete product metric.
double union_prohorov(const Side& x, const Side& y, const std::vector<int>& phi,
                      double dist) {
  const int ax = int(x.atoms.size());
  const int ay = int(y.atoms.size());
  const double big = 2.0 * (x.max_finite + y.max_finite + dist + 1.0);
  auto fin = [&](double d) { return std::isfinite(d) ? d : big; };

  const int lx = x.u->leaf_count();
  const int ly = y.u->leaf_count();
  // Glue on leaves, then lift to atoms with the mark term.
  std::vector<std::vector<double>> cross(lx, std::vector<double>(ly, 0.0));
  for (int i = 0; i < lx; ++i)
    for (int j = 0; j < ly; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < lx; ++k)
        best = std::min(best, fin(x.dist[i][k]) + fin(y.dist[phi[k]][j]));
      cross[i][j] = best + dist / 2.0;
    }

  FiniteMetricSpace space = FiniteMetricSpace::zeros(ax + ay);
  auto mark_gap = [](const GpAtom& a, const GpAtom& b) {
    return (a.mark >= 0 && a.mark != b.mark) ? 1.0 : 0.0;
  };
  for (int a = 0; a < ax; ++a)
    for (int b = a + 1; b < ax; ++b)
      space.set_dist(a, b, fin(x.dist[x.atoms[a].leaf][x.atoms[b].leaf]) +
                               mark_gap(x.atoms[a], x.atoms[b]));
  for (int a = 0; a < ay; ++a)
    for (int b = a + 1; b < ay; ++b)
      space.set_dist(ax + a, ax + b, fin(y.dist[y.atoms[a].leaf][y.atoms[b].leaf]) +
                                         mark_gap(y.atoms[a], y.atoms[b]));
  for (int a = 0; a < ax; ++a)
    for (int b = 0; b < ay; ++b)
      space.set_dist(a, ax + b, cross[x.atoms[a].leaf][y.atoms[b].leaf] +
                                    mark_gap(x.atoms[a], y.atoms[b]));

  std::vector<double> mu1(ax + ay, 0.0), mu2(ax + ay, 0.0);
  for (int a = 0; a < ax; ++a) mu1[a] = x.atoms[a].mass;
  for (int b = 0; b < ay; ++b) mu2[ax + b] = y.atoms[b].mass;
  return prohorov_distance(space, mu1, mu2);
}

double upper_for_map(const Side& x, const Side& y, const std::vector<int>& phi,
                     double dist, double tol) {
  if (mass_exact(x, y, phi, tol)) return dist / 2.0;
  if (x.atoms.size() + y.atoms.size() <= 300) return union_prohorov(x, y, phi, dist);
  // Coarse fallback: transport each phi-class at D/2, paying the unmatched
  // class mass on top.
  std::map<std::pair<int, int>, double> diff;
  for (const GpAtom& a : x.atoms) diff[{phi[a.leaf], a.mark}] += a.mass;
  for (const GpAtom& a : y.atoms) diff[{a.leaf, a.mark}] -= a.mass;
  double plus = 0.0, minus = 0.0;
  for (auto& [key, m] : diff) (m > 0 ? plus : minus) += std::abs(m);
  return dist / 2.0 + std::max(plus, minus);
}

struct Search {
  const Side* x = nullptr;
  const Side* y = nullptr;
  double mass_cap = 0.0;
  double tol = 0.0;
  std::vector<int> phi;
  std::vector<int> use_count;
  double best = std::numeric_limits<double>::infinity();

  void run(std::size_t i, double dist) {
    const std::size_t lx = phi.size();
    if (std::min(dist / 2.0, mass_cap) >= best - 1e-15) return;
    int unused = 0;
    for (int c : use_count) unused += (c == 0);
    if (unused > int(lx - i)) return;  // cannot reach surjectivity
    if (i == lx) {
      best = std::min(best, upper_for_map(*x, *y, phi, dist, tol));
      return;
    }
    for (int cand = 0; cand < int(use_count.size()); ++cand) {
      double d = dist;
      for (std::size_t j = 0; j < i; ++j)
        d = std::max(d, height_diff(x->dist[i][j], y->dist[cand][phi[j]]));
      phi[i] = cand;
      ++use_count[cand];
      run(i + 1, d);
      --use_count[cand];
    }
    phi[i] = -1;
  }
};

// Rank map: sort both leaf lists by mass (descending, position tie-break)
// and assign rank-wise, wrapping around the smaller side.
std::vector<int> greedy_rank_map(const Side& x, const Side& y) {
  auto ranks = [](const Side& s) {
    std::vector<int> idx(s.u->leaf_count());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return s.u->leaf(a).mass > s.u->leaf(b).mass;
    });
    return idx;
  };
  std::vector<int> rx = ranks(x), ry = ranks(y);
  std::vector<int> phi(rx.size());
  for (std::size_t r = 0; r < rx.size(); ++r) phi[rx[r]] = ry[r % ry.size()];
  return phi;
}

}  // namespace

GpBounds gp_bounds(const AtomicUmm& u, const AtomicUmm& v, GpOptions options) {
  if (u.marked() != v.marked())
    throw std::invalid_argument("gp_bounds: one space marked, the other not");

  GpBounds out;
  const double t1 = u.total_mass();
  const double t2 = v.total_mass();
  const double scale = std::max({1.0, t1, t2});
  const double tol = 1e-12 * scale;

  out.lower = std::abs(t1 - t2);
  if (out.lower <= tol) {
    // Equal total mass m: half the Prohorov distance of the distance laws,
    // rescaled for non-probability m.
    const double m = t1;
    const double law_gap = prohorov_distance_1d(nu2_law(u), nu2_law(v));
    const double factor = 2.0 * std::max(1.0, 1.0 / m) * std::max(1.0, m * m);
    out.lower = std::max(out.lower, law_gap / factor);
  }

  // Upper bound: big side maps onto small side.
  Side su = make_side(u);
  Side sv = make_side(v);
  const Side& x = su.u->leaf_count() >= sv.u->leaf_count() ? su : sv;
  const Side& y = su.u->leaf_count() >= sv.u->leaf_count() ? sv : su;

  std::vector<int> seed = greedy_rank_map(x, y);
  double seed_upper = upper_for_map(x, y, seed, map_distortion(x, y, seed), tol);

  if (x.u->leaf_count() <= options.exhaustive_leaf_limit) {
    Search search;
    search.x = &x;
    search.y = &y;
    search.mass_cap = std::max(t1, t2);
    search.tol = tol;
    search.phi.assign(x.u->leaf_count(), -1);
    search.use_count.assign(y.u->leaf_count(), 0);
    search.best = seed_upper;
    search.run(0, 0.0);
    out.upper = search.best;
  } else {
    out.upper = seed_upper;
  }
  out.upper = std::max(out.upper, out.lower);
  return out;
}

}  // namespace evogen
