#include "evogen/prohorov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace evogen {

namespace {

// Dinic max-flow with double capacities. Sizes here are tiny (hundreds of
// nodes), so the asymptotics never matter; the residual tolerance guards
// against float dust.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1), level_(n), it_(n) {}

  void add_edge(int from, int to, double cap) {
    edges_.push_back({to, head_[from], cap});
    head_[from] = int(edges_.size()) - 1;
    edges_.push_back({from, head_[to], 0.0});
    head_[to] = int(edges_.size()) - 1;
  }

  double run(int s, int t, double eps) {
    double flow = 0.0;
    while (bfs(s, t, eps)) {
      it_ = head_;
      while (double pushed = dfs(s, t, std::numeric_limits<double>::infinity(), eps))
        flow += pushed;
    }
    return flow;
  }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    level_[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[u]; e >= 0; e = edges_[e].next)
        if (edges_[e].cap > eps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double limit, double eps) {
    if (u == t) return limit;
    for (int& e = it_[u]; e >= 0; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > eps && level_[ed.to] == level_[u] + 1) {
        double pushed = dfs(ed.to, t, std::min(limit, ed.cap), eps);
        if (pushed > 0.0) {
          ed.cap -= pushed;
          edges_[e ^ 1].cap += pushed;
          return pushed;
        }
      }
    }
    return 0.0;
  }

  std::vector<int> head_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

double prohorov_distance(const FiniteMetricSpace& space,
                         const std::vector<double>& mu1,
                         const std::vector<double>& mu2) {
  if (int(mu1.size()) != space.n || int(mu2.size()) != space.n)
    throw std::invalid_argument("prohorov: mass vector size mismatch");
  if (space.n > (1 << 16)) throw std::length_error("prohorov: atom budget exceeded");

  std::vector<int> sup1, sup2;
  double t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < space.n; ++i) {
    if (mu1[i] < 0.0 || mu2[i] < 0.0)
      throw std::invalid_argument("prohorov: negative mass");
    if (mu1[i] > 0.0) {
      sup1.push_back(i);
      t1 += mu1[i];
    }
    if (mu2[i] > 0.0) {
      sup2.push_back(i);
      t2 += mu2[i];
    }
  }
  if (sup1.empty() || sup2.empty()) return std::max(t1, t2);

  // Candidate interval endpoints: 0 plus every distinct support distance.
  std::vector<double> thresholds{0.0};
  for (int i : sup1)
    for (int j : sup2) thresholds.push_back(space.dist(i, j));
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double scale = std::max({1.0, t1, t2});
  const double eps = 1e-15 * scale;
  const int n1 = int(sup1.size());
  const int n2 = int(sup2.size());
  const int src = 0, snk = n1 + n2 + 1;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    const double tl = thresholds[l];
    const double t_next = l + 1 < thresholds.size()
                              ? thresholds[l + 1]
                              : std::numeric_limits<double>::infinity();
    MaxFlow mf(n1 + n2 + 2);
    for (int a = 0; a < n1; ++a) mf.add_edge(src, 1 + a, mu1[sup1[a]]);
    for (int b = 0; b < n2; ++b) mf.add_edge(1 + n1 + b, snk, mu2[sup2[b]]);
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < n2; ++b)
        if (space.dist(sup1[a], sup2[b]) <= tl)
          mf.add_edge(1 + a, 1 + n1 + b, 2.0 * scale);
    const double flow = mf.run(src, snk, eps);
    // Worst deficit over both directions within this edge set.
    double deficit = std::max(t1 - flow, t2 - flow);
    if (deficit < eps) deficit = 0.0;
    if (deficit <= t_next) best = std::min(best, std::max(tl, deficit));
  }
  return best;
}

double prohorov_distance_1d(const std::vector<std::pair<double, double>>& law1,
                            const std::vector<std::pair<double, double>>& law2) {
  std::vector<double> points;
  points.reserve(law1.size() + law2.size());
  for (auto& [x, m] : law1) points.push_back(x);
  for (auto& [x, m] : law2) points.push_back(x);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const int n = int(points.size());
  FiniteMetricSpace space = FiniteMetricSpace::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) space.set_dist(i, j, std::abs(points[i] - points[j]));

  auto mass_vector = [&](const std::vector<std::pair<double, double>>& law) {
    std::vector<double> mu(n, 0.0);
    for (auto& [x, m] : law) {
      int idx = int(std::lower_bound(points.begin(), points.end(), x) - points.begin());
      mu[idx] += m;
    }
    return mu;
  };
  return prohorov_distance(space, mass_vector(law1), mass_vector(law2));
}

}  // namespace evogen
