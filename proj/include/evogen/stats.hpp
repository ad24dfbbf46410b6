#pragma once

#include <functional>
#include <vector>

namespace evogen {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& samples);

// One-sample Kolmogorov-Smirnov statistic against a cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov p-value with Stephens' finite-n correction for the
// one-sample statistic, and the standard effective-n form for two samples.
double ks_pvalue_one_sample(double statistic, std::size_t n);
double ks_pvalue_two_sample(double statistic, std::size_t n, std::size_t m);

}  // namespace evogen
