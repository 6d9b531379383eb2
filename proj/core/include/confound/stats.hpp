#pragma once

// Small descriptive statistics and Kolmogorov-Smirnov tests used by the
// experiment runner and the test suites.

#include <span>
#include <vector>

namespace confound::stats {

double mean(std::span<const double> xs);
// Unbiased (n - 1) standard deviation.
double sample_sd(std::span<const double> xs);
double median(std::span<const double> xs);
double pearson(std::span<const double> xs, std::span<const double> ys);

// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic;
  double p_value;
};

// Two-sample test; p-value from the asymptotic law with Stephens' small
// sample correction.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
// One-sample test against Uniform[0, 1].
KsResult ks_uniform(std::span<const double> xs);

}  // namespace confound::stats
