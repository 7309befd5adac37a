#include "homog/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homog {

Estimate mean_se(std::span<const double> x) {
  Estimate e;
  if (x.empty()) return e;
  double s = 0.0;
  for (double v : x) s += v;
  e.mean = s / static_cast<double>(x.size());
  if (x.size() < 2) return e;
  double ss = 0.0;
  for (double v : x) ss += (v - e.mean) * (v - e.mean);
  const double var = ss / static_cast<double>(x.size() - 1);
  e.se = std::sqrt(var / static_cast<double>(x.size()));
  return e;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normal(std::span<const double> x, double mean, double sd) {
  if (x.empty()) throw std::invalid_argument("KS test on an empty sample");
  if (!(sd > 0.0)) throw std::invalid_argument("KS test needs a positive standard deviation");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(s[i] - mean) / (sd * std::sqrt(2.0)));
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

}  // namespace homog
