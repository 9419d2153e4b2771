#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "stablesums/error.hpp"

namespace stablesums {

/// Linear-interpolation quantile of an ascending sample (R type 7).
inline double quantile_sorted(std::span<const double> s, double level) {
  require(!s.empty(), "quantile of an empty sample");
  const double pos = std::clamp(level, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
}

inline double quantile(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, level);
}

/// Order-statistic quantile: the smallest sample value whose empirical CDF
/// reaches level (R type 1). Always a member of the sample.
inline double order_quantile(std::vector<double> v, double level) {
  require(!v.empty(), "quantile of an empty sample");
  const auto n = v.size();
  auto r = static_cast<std::size_t>(std::ceil(std::clamp(level, 0.0, 1.0) * static_cast<double>(n)));
  r = std::clamp<std::size_t>(r, 1, n);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r - 1), v.end());
  return v[r - 1];
}

inline double mean(std::span<const double> v) {
  require(!v.empty(), "mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population variance (divides by n).
inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

/// Two-sample-free Kolmogorov-Smirnov distance between a sample and a CDF.
template <class Cdf>
double ks_distance(std::vector<double> v, Cdf&& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace stablesums
