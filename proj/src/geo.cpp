#include "evogen/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <queue>
#include <stdexcept>

#include "evogen/rng.hpp"

namespace evogen {

void GeoTorus::validate() const {
  if (d < 1 || d > 6) throw std::invalid_argument("torus dimension must be in [1,6]");
  if (half_width < 1) throw std::invalid_argument("torus half-width must be >= 1");
  double vol = std::pow(2.0 * half_width, d);
  if (vol > double(1 << 28)) throw std::invalid_argument("torus too large");
}

int GeoTorus::volume() const {
  int v = 1;
  for (int i = 0; i < d; ++i) v *= side();
  return v;
}

int GeoTorus::wrap(long long c) const {
  const int s = side();
  long long r = ((c % s) + s) % s;
  return r <= half_width ? int(r) : int(r - s);
}

int GeoTorus::site_of(const std::vector<int>& coords) const {
  int idx = 0;
  for (int i = 0; i < d; ++i) {
    int u = coords[i] + half_width - 1;
    idx = idx * side() + u;
  }
  return idx;
}

std::vector<int> GeoTorus::coords_of(int site) const {
  std::vector<int> coords(d);
  for (int i = d - 1; i >= 0; --i) {
    coords[i] = site % side() - half_width + 1;
    site /= side();
  }
  return coords;
}

int GeoTorus::add_offset(int site, const std::vector<int>& offset) const {
  std::vector<int> coords = coords_of(site);
  for (int i = 0; i < d; ++i) coords[i] = wrap(static_cast<long long>(coords[i]) + offset[i]);
  return site_of(coords);
}

void MigrationKernel::validate() const {
  if (d < 1) throw std::invalid_argument("kernel dimension must be >= 1");
  if (offsets.size() != probs.size() || offsets.empty())
    throw std::invalid_argument("kernel needs matching nonempty offsets/probs");
  double total = 0.0;
  std::map<std::vector<int>, int> seen;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (int(offsets[i].size()) != d) throw std::invalid_argument("kernel offset arity mismatch");
    if (probs[i] <= 0.0) throw std::invalid_argument("kernel probabilities must be positive");
    if (seen.count(offsets[i])) throw std::invalid_argument("kernel offsets must be distinct");
    seen[offsets[i]] = 1;
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("kernel probabilities must sum to 1");
}

double MigrationKernel::prob_at_origin() const {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    bool zero = true;
    for (int c : offsets[i]) zero = zero && c == 0;
    if (zero) return probs[i];
  }
  return 0.0;
}

int MigrationKernel::max_abs_offset() const {
  int m = 0;
  for (const auto& off : offsets)
    for (int c : off) m = std::max(m, std::abs(c));
  return m;
}

double MigrationKernel::max_axis_variance() const {
  double best = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    double v = 0.0;
    for (std::size_t i = 0; i < offsets.size(); ++i)
      v += probs[i] * double(offsets[i][axis]) * double(offsets[i][axis]);
    best = std::max(best, v);
  }
  return best;
}

bool MigrationKernel::is_symmetric(double tol) const {
  std::map<std::vector<int>, double> table;
  for (std::size_t i = 0; i < offsets.size(); ++i) table[offsets[i]] = probs[i];
  for (const auto& [off, p] : table) {
    std::vector<int> neg(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) neg[i] = -off[i];
    auto it = table.find(neg);
    double q = it == table.end() ? 0.0 : it->second;
    if (std::abs(p - q) > tol) return false;
  }
  return true;
}

MigrationKernel simple_walk_kernel(int d) {
  MigrationKernel k;
  k.d = d;
  for (int axis = 0; axis < d; ++axis) {
    for (int sign : {-1, 1}) {
      std::vector<int> off(d, 0);
      off[axis] = sign;
      k.offsets.push_back(off);
      k.probs.push_back(1.0 / (2.0 * d));
    }
  }
  return k;
}

double WrappedKernel::prob_at_zero() const {
  const int zero_site = torus.site_of(std::vector<int>(torus.d, 0));
  for (std::size_t i = 0; i < offset_sites.size(); ++i)
    if (offset_sites[i] == zero_site) return probs[i];
  return 0.0;
}

std::vector<std::vector<double>> WrappedKernel::dense() const {
  const int v = torus.volume();
  std::vector<std::vector<double>> m(v, std::vector<double>(v, 0.0));
  for (int site = 0; site < v; ++site)
    for (std::size_t i = 0; i < offset_sites.size(); ++i)
      m[site][torus.add_offset(site, torus.coords_of(offset_sites[i]))] += probs[i];
  return m;
}

WrappedKernel wrap_kernel(const MigrationKernel& kernel, const GeoTorus& torus) {
  kernel.validate();
  torus.validate();
  if (kernel.d != torus.d) throw std::invalid_argument("kernel/torus dimension mismatch");
  std::map<int, double> folded;
  for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
    std::vector<int> coords(torus.d);
    for (int c = 0; c < torus.d; ++c) coords[c] = torus.wrap(kernel.offsets[i][c]);
    folded[torus.site_of(coords)] += kernel.probs[i];
  }
  WrappedKernel out;
  out.torus = torus;
  for (const auto& [site, p] : folded) {
    out.offset_sites.push_back(site);
    out.probs.push_back(p);
  }
  return out;
}

int ThinnedWalk::step(int from, double x) const {
  std::size_t k =
      std::size_t(std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
  if (k >= cdf.size()) k = cdf.size() - 1;
  return target[k * volume + from];
}

ThinnedWalk make_thinned_walk(const MigrationKernel& kernel, const GeoTorus& torus) {
  const WrappedKernel wk = wrap_kernel(kernel, torus);
  const int zero_site = torus.site_of(std::vector<int>(torus.d, 0));
  ThinnedWalk out;
  out.volume = torus.volume();
  for (std::size_t i = 0; i < wk.offset_sites.size(); ++i) {
    if (wk.offset_sites[i] == zero_site) continue;
    out.p_move += wk.probs[i];
    out.cdf.push_back(out.p_move);
    const std::vector<int> off = torus.coords_of(wk.offset_sites[i]);
    for (int s = 0; s < out.volume; ++s) out.target.push_back(torus.add_offset(s, off));
  }
  return out;
}

MigrationKernel symmetrize(const MigrationKernel& kernel) {
  kernel.validate();
  std::map<std::vector<int>, double> acc;
  for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
    std::vector<int> neg(kernel.d);
    for (int c = 0; c < kernel.d; ++c) neg[c] = -kernel.offsets[i][c];
    acc[kernel.offsets[i]] += 0.5 * kernel.probs[i];
    acc[neg] += 0.5 * kernel.probs[i];
  }
  MigrationKernel out;
  out.d = kernel.d;
  for (const auto& [off, p] : acc) {
    out.offsets.push_back(off);
    out.probs.push_back(p);
  }
  return out;
}

MigrationKernel reverse(const MigrationKernel& kernel) {
  kernel.validate();
  std::map<std::vector<int>, double> acc;
  for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
    std::vector<int> neg(kernel.d);
    for (int c = 0; c < kernel.d; ++c) neg[c] = -kernel.offsets[i][c];
    acc[neg] = kernel.probs[i];
  }
  MigrationKernel out;
  out.d = kernel.d;
  for (const auto& [off, p] : acc) {
    out.offsets.push_back(off);
    out.probs.push_back(p);
  }
  return out;
}

namespace {

// Work box for the dense transition power DP: cube [-R, R]^d, last axis
// contiguous.
struct PowerBox {
  int d = 0;
  int radius_alloc = 0;
  std::vector<long long> strides;
  long long cells = 0;

  void init(int dim, int radius) {
    d = dim;
    radius_alloc = radius;
    const long long s = 2LL * radius + 1;
    strides.assign(d, 1);
    for (int i = d - 2; i >= 0; --i) strides[i] = strides[i + 1] * s;
    cells = strides[0] * s;
  }
  long long origin() const {
    long long idx = 0;
    for (int i = 0; i < d; ++i) idx += radius_alloc * strides[i];
    return idx;
  }
};

// Support radius of p_j, truncated to a few standard deviations; mass that
// wanders outside is dropped (its later return contribution is negligible for
// the g tolerances used here).
int dp_radius(int j, int support_radius, double axis_var) {
  long long exact = (long long)j * support_radius;
  long long capped =
      (long long)std::ceil(2.5 * std::sqrt(double(j + 1) * axis_var)) + support_radius + 2;
  return int(std::min(exact, capped));
}

// Enumerates the contiguous runs (fixed leading coordinates, free last axis)
// of the sub-box [-r, r]^d.
long long run_count(int d, int r) {
  long long n = 1;
  for (int i = 0; i < d - 1; ++i) n *= 2LL * r + 1;
  return n;
}

long long run_base(const PowerBox& box, int r, long long run) {
  long long base = 0;
  for (int i = box.d - 2; i >= 0; --i) {
    long long c = run % (2LL * r + 1) - r;
    base += (c + box.radius_alloc) * box.strides[i];
    run /= 2LL * r + 1;
  }
  return base + (box.radius_alloc - r);  // last axis starts at -r
}

}  // namespace

std::vector<double> return_probabilities(const MigrationKernel& kernel, int truncation,
                                         bool parallel) {
  kernel.validate();
  if (!kernel.is_symmetric(1e-12))
    throw std::invalid_argument("green integral requires a symmetrized kernel");
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");

  std::vector<double> u(truncation + 1, 0.0);
  u[0] = 1.0;

  const int support_radius = kernel.max_abs_offset();
  const double axis_var = kernel.max_axis_variance();
  const int j_last = (truncation + 1) / 2;
  const int radius_max = dp_radius(j_last, support_radius, axis_var);

  PowerBox box;
  box.init(kernel.d, radius_max + support_radius);
  std::vector<double> cur(box.cells, 0.0), nxt(box.cells, 0.0);
  cur[box.origin()] = 1.0;

  std::vector<long long> deltas;
  for (const auto& off : kernel.offsets) {
    long long delta = 0;
    for (int i = 0; i < kernel.d; ++i) delta += (long long)off[i] * box.strides[i];
    deltas.push_back(delta);
  }
  const int n_off = int(deltas.size());
  const double* probs = kernel.probs.data();

  std::vector<double> partials;
  for (int j = 1; j <= j_last; ++j) {
    const int r = dp_radius(j, support_radius, axis_var);
    const long long runs = run_count(kernel.d, r);
    const long long len = 2LL * r + 1;

#pragma omp parallel for schedule(static) if (parallel)
    for (long long run = 0; run < runs; ++run) {
      long long base = run_base(box, r, run);
      for (long long i = base; i < base + len; ++i) {
        double acc = 0.0;
        for (int o = 0; o < n_off; ++o) acc += cur[i - deltas[o]] * probs[o];
        nxt[i] = acc;
      }
    }

    // u_{2j-1} = <p_{j-1}, p_j>, u_{2j} = <p_j, p_j>. Per-run partial sums
    // are reduced in run order so results do not depend on the thread count.
    const bool want_odd = 2 * j - 1 <= truncation;
    const bool want_even = 2 * j <= truncation;
    partials.assign(2 * runs, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (long long run = 0; run < runs; ++run) {
      long long base = run_base(box, r, run);
      double dot_prev = 0.0, dot_self = 0.0;
      for (long long i = base; i < base + len; ++i) {
        dot_prev += cur[i] * nxt[i];
        dot_self += nxt[i] * nxt[i];
      }
      partials[2 * run] = dot_prev;
      partials[2 * run + 1] = dot_self;
    }
    double odd_sum = 0.0, even_sum = 0.0;
    for (long long run = 0; run < runs; ++run) {
      odd_sum += partials[2 * run];
      even_sum += partials[2 * run + 1];
    }
    if (want_odd) u[2 * j - 1] = odd_sum;
    if (want_even) u[2 * j] = even_sum;
    std::swap(cur, nxt);
  }
  return u;
}

namespace {

GreenResult summarize_terms(const std::vector<double>& u) {
  GreenResult res;
  res.truncation = int(u.size()) - 1;
  double sum = 0.0;
  for (double term : u) sum += term;
  res.partial_sum = sum;
  res.g = 0.5 * sum;
  const int k = res.truncation;
  const int quarter_start = k - k / 4;
  double worst = 0.0;
  for (int i = quarter_start; i <= k; ++i) worst = std::max(worst, u[i]);
  res.last_quarter_max_term = worst;
  res.divergent = worst > 1e-4;
  return res;
}

std::vector<double> mc_return_probabilities(const MigrationKernel& kernel, int truncation,
                                            std::uint64_t walks, std::uint64_t seed,
                                            bool parallel) {
  std::vector<double> cdf(kernel.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < kernel.probs.size(); ++i) {
    acc += kernel.probs[i];
    cdf[i] = acc;
  }
  std::vector<std::uint64_t> visits(truncation + 1, 0);
  visits[0] = walks;

#pragma omp parallel if (parallel)
  {
    std::vector<std::uint64_t> local(truncation + 1, 0);
#pragma omp for schedule(static)
    for (long long w = 0; w < (long long)walks; ++w) {
      Rng rng = Rng::substream(seed, std::uint64_t(w));
      std::vector<long long> pos(kernel.d, 0);
      for (int k = 1; k <= truncation; ++k) {
        double x = rng.uniform01();
        std::size_t pick = 0;
        while (pick + 1 < cdf.size() && x >= cdf[pick]) ++pick;
        bool at_origin = true;
        for (int i = 0; i < kernel.d; ++i) {
          pos[i] += kernel.offsets[pick][i];
          at_origin = at_origin && pos[i] == 0;
        }
        if (at_origin) ++local[k];
      }
    }
#pragma omp critical
    for (int k = 0; k <= truncation; ++k) visits[k] += local[k];
  }
  // the k=0 term was pre-counted once per walk inside visits[0] already
  std::vector<double> u(truncation + 1);
  for (int k = 0; k <= truncation; ++k) u[k] = double(visits[k]) / double(walks);
  u[0] = 1.0;
  return u;
}

}  // namespace

GreenResult green_integral(const MigrationKernel& symmetric_kernel, int truncation,
                           const GreenOptions& options) {
  if (options.method == GreenMethod::power_sum)
    return summarize_terms(return_probabilities(symmetric_kernel, truncation, options.parallel));
  symmetric_kernel.validate();
  if (!symmetric_kernel.is_symmetric(1e-12))
    throw std::invalid_argument("green integral requires a symmetrized kernel");
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
  return summarize_terms(mc_return_probabilities(symmetric_kernel, truncation,
                                                 options.mc_walks, options.seed,
                                                 options.parallel));
}

double diffusion_constant(double gamma, double g) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  if (g < 0.0) throw std::invalid_argument("green value must be nonnegative");
  return gamma / (1.0 + gamma * g);
}

double diffusion_constant(double gamma, const GreenResult& green) {
  if (green.divergent)
    throw std::domain_error("green integral diverges; no diffusion constant");
  return diffusion_constant(gamma, green.g);
}

bool reaches_all_sites(const WrappedKernel& kernel, int max_steps) {
  const int v = kernel.torus.volume();
  std::vector<int> depth(v, -1);
  const int start = kernel.torus.site_of(std::vector<int>(kernel.torus.d, 0));
  std::queue<int> frontier;
  depth[start] = 0;
  frontier.push(start);
  int reached = 1;
  while (!frontier.empty()) {
    int site = frontier.front();
    frontier.pop();
    if (depth[site] >= max_steps) continue;
    for (int off : kernel.offset_sites) {
      int next = kernel.torus.add_offset(site, kernel.torus.coords_of(off));
      if (depth[next] < 0) {
        depth[next] = depth[site] + 1;
        frontier.push(next);
        ++reached;
      }
    }
  }
  return reached == v;
}

}  // namespace evogen
