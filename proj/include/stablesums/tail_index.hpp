#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stablesums/error.hpp"
#include "stablesums/multi_series.hpp"
#include "stablesums/stats.hpp"

namespace stablesums {

struct TailFit {
  double alpha_hat = 0.0;
  double gamma_hat = 0.0;
  std::size_t k = 0;
  double rho_hat = 0.0;
  bool corrected = false;
  /// Set when the bias correction was requested but produced a non-finite
  /// or nonpositive value, so plain Hill was returned instead.
  bool fell_back = false;
};

struct SpatialIndexes {
  std::vector<double> m;
  std::size_t k = 0;
  double alpha_used = 0.0;
};

struct Extremogram {
  std::vector<std::size_t> lags;
  std::vector<double> values;
  double baseline = 0.0;
  double threshold_quantile = 0.95;
};

/// Second-order estimator family of Fraga Alves, Gomes and de Haan:
/// tau = 0 uses the log-moment statistic, tau = 1 the power-moment one.
enum class RhoEstimator { LogMoments, PowerMoments };

/// How the pointwise estimates are pooled: the median over 2 <= k_rho <= k,
/// or a single estimate at k_rho = floor(n^0.995).
enum class RhoRule { MedianToK, LargeK };

inline std::string to_string(RhoRule r) { return r == RhoRule::MedianToK ? "median_to_k" : "large_k"; }

inline RhoRule rho_rule_from_string(const std::string& s) {
  if (s == "median_to_k") return RhoRule::MedianToK;
  if (s == "large_k") return RhoRule::LargeK;
  throw precondition_error("unknown rho rule '" + s + "' (expected median_to_k or large_k)");
}

namespace detail {

/// log X_(i) for i = 1..m+1 of the descending order statistics.
inline std::vector<double> top_logs(std::span<const double> sample, std::size_t m) {
  require(m < sample.size(), "tail index: k must be smaller than the sample size");
  std::vector<double> v(sample.begin(), sample.end());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m + 1), v.end(), std::greater<>());
  std::vector<double> logs(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    require(v[i] > 0.0, "tail index: the top k+1 order statistics must be positive");
    logs[i] = std::log(v[i]);
  }
  return logs;
}

/// (1/k) sum_{i<=k} (log X_(i) - log X_(k+1))^j for j = 1, 2, 3.
inline std::array<double, 3> log_moments(const std::vector<double>& logs, std::size_t k) {
  std::array<double, 3> m{};
  const double base = logs[k];
  for (std::size_t i = 0; i < k; ++i) {
    const double e = logs[i] - base;
    m[0] += e;
    m[1] += e * e;
    m[2] += e * e * e;
  }
  for (auto& x : m) x /= static_cast<double>(k);
  return m;
}

inline double pointwise_rho(const std::array<double, 3>& m, RhoEstimator kind) {
  double t;
  if (kind == RhoEstimator::LogMoments) {
    const double l1 = std::log(m[0]);
    const double l2 = 0.5 * std::log(m[1] / 2.0);
    const double l3 = std::log(m[2] / 6.0) / 3.0;
    t = (l1 - l2) / (l2 - l3);
  } else {
    const double r2 = std::sqrt(m[1] / 2.0);
    const double r3 = std::cbrt(m[2] / 6.0);
    t = (m[0] - r2) / (r2 - r3);
  }
  return -std::abs(3.0 * (t - 1.0) / (t - 3.0));
}

}  // namespace detail

/// Plain Hill estimator on the k largest order statistics.
inline TailFit hill(std::span<const double> sample, std::size_t k) {
  require(k >= 2 && k < sample.size(), "hill: need 2 <= k < n");
  const auto logs = detail::top_logs(sample, k);
  const double gamma = detail::log_moments(logs, k)[0];
  if (!(gamma > 0.0)) throw degenerate_data_error("hill: the top order statistics are all equal");
  return {1.0 / gamma, gamma, k, 0.0, false, false};
}

/// Second-order parameter, clipped to be nonpositive. MedianToK takes the
/// median of the pointwise estimates over 2 <= k_rho <= k.
inline double rho_second_order(std::span<const double> sample, std::size_t k,
                               RhoEstimator kind = RhoEstimator::LogMoments, RhoRule rule = RhoRule::MedianToK) {
  if (k < 10) throw degenerate_data_error("rho_second_order: at least 10 exceedances are required");
  require(k < sample.size(), "rho_second_order: k must be smaller than the sample size");
  if (rule == RhoRule::LargeK) {
    const auto n = static_cast<double>(sample.size());
    const auto k1 = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(std::pow(n, 0.995))), k, sample.size() - 1);
    const auto logs = detail::top_logs(sample, k1);
    const double r = detail::pointwise_rho(detail::log_moments(logs, k1), kind);
    if (!std::isfinite(r)) throw degenerate_data_error("rho_second_order: tail carries no second-order information");
    return std::min(0.0, r);
  }
  const auto logs = detail::top_logs(sample, k);
  std::vector<double> rhos;
  rhos.reserve(k);
  for (std::size_t kr = 2; kr <= k; ++kr) {
    const double r = detail::pointwise_rho(detail::log_moments(logs, kr), kind);
    if (std::isfinite(r)) rhos.push_back(r);
  }
  if (rhos.empty()) throw degenerate_data_error("rho_second_order: tail carries no second-order information");
  return std::min(0.0, median(std::move(rhos)));
}

/// Bias-corrected Hill estimator of de Haan, Mercadier and Zhou:
/// gamma = M1 - (M2 - 2 M1^2)(1 - rho) / (2 M1 rho).
inline TailFit unbiased_hill(std::span<const double> sample, std::size_t k,
                             RhoEstimator kind = RhoEstimator::LogMoments, RhoRule rule = RhoRule::LargeK) {
  TailFit plain = hill(sample, k);
  const double rho = rho_second_order(sample, k, kind, rule);
  plain.rho_hat = rho;
  const auto logs = detail::top_logs(sample, k);
  const auto m = detail::log_moments(logs, k);
  const double gamma = m[0] - (m[1] - 2.0 * m[0] * m[0]) * (1.0 - rho) / (2.0 * m[0] * rho);
  if (!std::isfinite(gamma) || !(gamma > 0.0)) {
    plain.fell_back = true;
    return plain;
  }
  return {1.0 / gamma, gamma, k, rho, true, false};
}

/// Spatial clustering indexes m(j): mean of (X_t(j))_+^alpha / |X_t|^alpha
/// over rows whose norm reaches the threshold_quantile of the norm sample.
inline SpatialIndexes spatial_indexes(const MultiSeries& series, double alpha, double threshold_quantile = 0.95) {
  require(alpha > 0.0, "spatial_indexes: alpha must be positive");
  require(series.rows() >= 20, "spatial_indexes: at least 20 rows are required");
  require(threshold_quantile > 0.0 && threshold_quantile < 1.0, "spatial_indexes: threshold quantile must lie in (0, 1)");
  const auto norms = series.norms();
  if (*std::max_element(norms.begin(), norms.end()) == 0.0) {
    throw degenerate_data_error("spatial_indexes: series is identically zero");
  }
  const std::size_t d = series.dim();
  const double u = order_quantile(norms, threshold_quantile);
  SpatialIndexes out;
  out.alpha_used = alpha;
  out.m.assign(d, 0.0);
  for (std::size_t t = 0; t < series.rows(); ++t) {
    if (norms[t] < u || norms[t] == 0.0) continue;
    ++out.k;
    const double na = std::pow(norms[t], alpha);
    for (std::size_t j = 0; j < d; ++j) {
      const double x = series(t, j);
      if (x > 0.0) out.m[j] += std::pow(x, alpha) / na;
    }
  }
  if (d == 1) {
    out.m = {1.0};
    return out;
  }
  for (auto& v : out.m) v = std::min(1.0, v / static_cast<double>(out.k));
  return out;
}

/// Temporal extremogram of a univariate sample at its threshold_quantile.
inline Extremogram extremogram(std::span<const double> x, std::size_t max_lag, double threshold_quantile = 0.95) {
  const std::size_t n = x.size();
  require(n >= 4 && max_lag < n / 4, "extremogram: max_lag must be below n/4");
  require(threshold_quantile > 0.0 && threshold_quantile < 1.0, "extremogram: threshold quantile must lie in (0, 1)");
  const double u = order_quantile(std::vector<double>(x.begin(), x.end()), threshold_quantile);
  Extremogram out;
  out.threshold_quantile = threshold_quantile;
  out.baseline = 1.0 - threshold_quantile;
  for (std::size_t h = 0; h <= max_lag; ++h) {
    std::size_t base = 0, joint = 0;
    for (std::size_t t = 0; t + h < n; ++t) {
      if (x[t] > u) {
        ++base;
        if (x[t + h] > u) ++joint;
      }
    }
    if (base == 0) throw degenerate_data_error("extremogram: no exceedances of the threshold");
    out.lags.push_back(h);
    out.values.push_back(static_cast<double>(joint) / static_cast<double>(base));
  }
  return out;
}

/// Extremogram of the supremum norm of a multivariate series.
inline Extremogram extremogram(const MultiSeries& series, std::size_t max_lag, double threshold_quantile = 0.95) {
  const auto norms = series.dim() == 1 ? series.column(0) : series.norms();
  return extremogram(std::span<const double>(norms), max_lag, threshold_quantile);
}

}  // namespace stablesums
