#pragma once

// Sample summaries and Kolmogorov-Smirnov distances with asymptotic 5%
// critical values.

#include <cstddef>
#include <functional>
#include <span>

namespace bsnake {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

struct KsResult {
  double distance = 0.0;
  double critical = 0.0;  // 5% level
  bool below() const { return distance < critical; }
};

/// sup |F_n - F| against a continuous CDF; critical value 1.358 / sqrt(n).
KsResult ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// sup |F_n - G_m|; critical value 1.358 sqrt((n + m) / (n m)).
KsResult ks_statistic(std::span<const double> a, std::span<const double> b);

}  // namespace bsnake
