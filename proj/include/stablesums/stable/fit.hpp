#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "stablesums/error.hpp"
#include "stablesums/optimize.hpp"
#include "stablesums/stable/params.hpp"
#include "stablesums/stable/table.hpp"
#include "stablesums/stats.hpp"

namespace stablesums {

struct StableFit {
  StableParams params;  ///< S1, beta = 1
  double loglik = 0.0;
  std::size_t n = 0;
  bool converged = false;
  bool constrained_a1 = false;
};

struct LrtResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject_at_05 = false;
};

struct FitOptions {
  /// Starting point; defaults to median / IQR heuristics with a = 1.2.
  std::optional<StableParams> start;
  SimplexOptions simplex{};
};

namespace detail {

constexpr double kFitMinIndex = 0.5;
constexpr double kFitMaxIndex = 2.0;

inline double index_from_free(double t) {
  return kFitMinIndex + (kFitMaxIndex - kFitMinIndex) / (1.0 + std::exp(-t));
}

inline double free_from_index(double a) {
  const double u = std::clamp((a - kFitMinIndex) / (kFitMaxIndex - kFitMinIndex), 1e-6, 1.0 - 1e-6);
  return std::log(u / (1.0 - u));
}

}  // namespace detail

/// Log-likelihood of data under the beta = 1 law with S0 location mu0.
inline double loglik_beta1_s0(double a, double sigma, double mu0, std::span<const double> data,
                              std::vector<double>& scratch) {
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  scratch.resize(2 * data.size());
  std::span<double> z(scratch.data(), data.size());
  std::span<double> lf(scratch.data() + data.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) z[i] = (data[i] - mu0) / sigma;
  SkewedLogDensityTable::instance().log_pdf(a, z, lf);
  double s = 0.0;
  for (double v : lf) s += v;
  return s - static_cast<double>(data.size()) * std::log(sigma);
}

/// Maximum-likelihood fit with beta fixed at 1; free a in [0.5, 2] or a = 1.
inline StableFit fit_mle(std::span<const double> data, bool fix_a1, const FitOptions& opts = {}) {
  require(data.size() >= 20, "fit_mle: at least 20 observations are required");
  for (double x : data) require(std::isfinite(x), "fit_mle: data must be finite");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / double(sorted.size());
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  if (!(ss > 0.0)) throw degenerate_data_error("fit_mle: sample standard deviation is zero");

  const double median = quantile_sorted(sorted, 0.5);
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  if (!(iqr > 0.0)) iqr = std::sqrt(ss / double(sorted.size()));
  // Scale reference for the location coordinate.
  const double ref = iqr;

  StableParams start0{fix_a1 ? 1.0 : 1.2, iqr / 2.0, 1.0, median, ParamKind::S0};
  if (opts.start) {
    start0 = to_s0(*opts.start);
    start0.beta = 1.0;
    if (fix_a1) start0.a = 1.0;
    if (!(start0.sigma > 0.0)) start0.sigma = iqr / 2.0;
  }

  std::vector<double> scratch;
  MinimizeResult r;
  if (fix_a1) {
    auto nll = [&](const std::vector<double>& v) {
      return -loglik_beta1_s0(1.0, std::exp(v[0]), median + ref * v[1], data, scratch);
    };
    r = minimize_simplex(nll, {std::log(start0.sigma), (start0.mu - median) / ref}, {0.3, 0.3}, opts.simplex);
  } else {
    SkewedLogDensityTable::instance().warm(std::clamp(start0.a - 0.2, 0.5, 2.0),
                                           std::clamp(start0.a + 0.2, 0.5, 2.0));
    auto nll = [&](const std::vector<double>& v) {
      return -loglik_beta1_s0(detail::index_from_free(v[0]), std::exp(v[1]), median + ref * v[2], data, scratch);
    };
    r = minimize_simplex(nll,
                         {detail::free_from_index(start0.a), std::log(start0.sigma), (start0.mu - median) / ref},
                         {0.5, 0.3, 0.3}, opts.simplex);
  }

  StableFit fit;
  fit.n = data.size();
  fit.constrained_a1 = fix_a1;
  fit.loglik = -r.value;
  fit.converged = r.converged && std::isfinite(fit.loglik) && r.value < 1e299;
  StableParams p0;
  p0.kind = ParamKind::S0;
  p0.beta = 1.0;
  if (fix_a1) {
    p0.a = 1.0;
    p0.sigma = std::exp(r.x[0]);
    p0.mu = median + ref * r.x[1];
  } else {
    p0.a = detail::index_from_free(r.x[0]);
    p0.sigma = std::exp(r.x[1]);
    p0.mu = median + ref * r.x[2];
  }
  fit.params = to_s1(p0);
  return fit;
}

inline StableFit fit_mle(const std::vector<double>& data, bool fix_a1, const FitOptions& opts = {}) {
  return fit_mle(std::span<const double>(data), fix_a1, opts);
}

/// Likelihood ratio test of a = 1 against the free fit (chi-squared, 1 df).
inline LrtResult lrt_a_equals_1(const StableFit& free, const StableFit& constrained) {
  require(constrained.constrained_a1 && !free.constrained_a1, "lrt: expected a free and an a = 1 fit");
  require(free.n == constrained.n, "lrt: fits were computed on samples of different length");
  require(free.converged && constrained.converged, "lrt: both fits must have converged");
  LrtResult r;
  r.statistic = std::max(0.0, 2.0 * (free.loglik - constrained.loglik));
  r.p_value = std::erfc(std::sqrt(r.statistic / 2.0));
  r.reject_at_05 = r.p_value < 0.05;
  return r;
}

}  // namespace stablesums
