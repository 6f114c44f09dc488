#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace walltopo {

/// Neumaier-compensated summation. Used wherever a sum feeds a tight
/// residual check (volume constraints, conservation).
inline double sum_compensated(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

/// Population standard deviation, sqrt(mean((x - mean)^2)). Zero for empty input.
inline double population_std(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace walltopo
