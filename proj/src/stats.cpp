#include "evogen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evogen {

MeanSe mean_se(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_se of empty sample");
  MeanSe out;
  out.n = samples.size();
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.mean = sum / double(out.n);
  double ss = 0.0;
  for (double x : samples) ss += (x - out.mean) * (x - out.mean);
  if (out.n > 1) out.se = std::sqrt(ss / double(out.n - 1) / double(out.n));
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks on empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    worst = std::max(worst, std::abs(double(i + 1) / n - f));
    worst = std::max(worst, std::abs(f - double(i) / n));
  }
  return worst;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks on empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    worst = std::max(worst, std::abs(double(i) / double(a.size()) -
                                     double(j) / double(b.size())));
  }
  return worst;
}

namespace {

// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_survival(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-14) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

}  // namespace

double ks_pvalue_one_sample(double statistic, std::size_t n) {
  double sn = std::sqrt(double(n));
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * statistic);
}

double ks_pvalue_two_sample(double statistic, std::size_t n, std::size_t m) {
  double ne = std::sqrt(double(n) * double(m) / double(n + m));
  return kolmogorov_survival((ne + 0.12 + 0.11 / ne) * statistic);
}

}  // namespace evogen
