#pragma once

#include <span>
#include <vector>

namespace homog {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

/// Sample mean and its standard error (n - 1 denominator). Summation runs
/// in index order so results do not depend on scheduling.
Estimate mean_se(std::span<const double> x);

/// Linear-interpolation quantile (the usual "type 7") of unsorted data.
double quantile(std::vector<double> x, double q);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(mean, sd^2) with the
/// asymptotic Kolmogorov p-value.
KsResult ks_normal(std::span<const double> x, double mean, double sd);

/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda);

}  // namespace homog
