#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <gsl/gsl_linalg.h>

#include "stablesums/error.hpp"
#include "stablesums/optimize.hpp"
#include "stablesums/stats.hpp"

namespace stablesums {

struct ExtremalIndexEstimate {
  double theta = 1.0;
  std::size_t n_exceed = 0;
  std::vector<std::size_t> interexceedance_times;
  double threshold = 0.0;
};

struct Declustering {
  double theta = 1.0;
  double threshold = 0.0;
  std::vector<double> maxima;                          ///< one per cluster, in time order
  std::vector<std::vector<std::size_t>> clusters;      ///< exceedance positions per cluster
  std::size_t n_exceed = 0;
};

struct GpdFit {
  double u = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  std::size_t n_exceed = 0;
  std::size_t n_clusters = 0;
  double zeta_u = 1.0;
  double loglik = 0.0;
  bool converged = false;
  std::array<std::array<double, 2>, 2> cov{};  ///< (sigma, xi) from observed information
};

struct GevFit {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  std::size_t block_length = 1;
  double theta_hat = 1.0;
  double loglik = 0.0;
  bool converged = false;
  std::array<std::array<double, 3>, 3> cov{};  ///< (mu, sigma, xi)
};

struct ReturnLevelCi {
  double z = 0.0;
  double se = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::string method = "delta";
};

namespace detail {

constexpr double kXiLow = -0.5;
constexpr double kXiHigh = 1.0;

inline double xi_from_free(double t) { return kXiLow + (kXiHigh - kXiLow) / (1.0 + std::exp(-t)); }

inline double free_from_xi(double xi) {
  const double u = std::clamp((xi - kXiLow) / (kXiHigh - kXiLow), 1e-6, 1.0 - 1e-6);
  return std::log(u / (1.0 - u));
}

/// log(1 + xi y) / xi with its xi -> 0 limit y.
inline double log1p_over(double xi, double y) {
  const double t = xi * y;
  return std::abs(t) < 1e-10 ? y * (1.0 - t / 2.0) : std::log1p(t) / xi;
}

/// Inverse of the central-difference Hessian of f at x; false on failure.
template <std::size_t N>
bool inverse_hessian(const std::function<double(const std::array<double, N>&)>& f, std::array<double, N> x,
                     std::array<std::array<double, N>, N>& out) {
  std::array<double, N> h{};
  for (std::size_t i = 0; i < N; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
  const double f0 = f(x);
  gsl_matrix* hess = gsl_matrix_alloc(N, N);
  bool ok = std::isfinite(f0);
  for (std::size_t i = 0; i < N && ok; ++i) {
    for (std::size_t j = i; j < N && ok; ++j) {
      double v;
      if (i == j) {
        auto xp = x, xm = x;
        xp[i] += h[i];
        xm[i] -= h[i];
        v = (f(xp) - 2.0 * f0 + f(xm)) / (h[i] * h[i]);
      } else {
        auto pp = x, pm = x, mp = x, mm = x;
        pp[i] += h[i], pp[j] += h[j];
        pm[i] += h[i], pm[j] -= h[j];
        mp[i] -= h[i], mp[j] += h[j];
        mm[i] -= h[i], mm[j] -= h[j];
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      }
      ok = std::isfinite(v);
      gsl_matrix_set(hess, i, j, v);
      gsl_matrix_set(hess, j, i, v);
    }
  }
  if (ok) ok = gsl_linalg_cholesky_decomp1(hess) == GSL_SUCCESS;
  if (ok) ok = gsl_linalg_cholesky_invert(hess) == GSL_SUCCESS;
  if (ok) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) out[i][j] = gsl_matrix_get(hess, i, j);
    }
  }
  gsl_matrix_free(hess);
  return ok;
}

inline double gpd_nll(double sigma, double xi, std::span<const double> y) {
  if (!(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  double s = static_cast<double>(y.size()) * std::log(sigma);
  for (double v : y) {
    const double z = v / sigma;
    if (1.0 + xi * z <= 0.0) return std::numeric_limits<double>::infinity();
    s += (1.0 + xi) * log1p_over(xi, z);
  }
  return s;
}

inline double gev_nll(double mu, double sigma, double xi, std::span<const double> x) {
  if (!(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  double s = static_cast<double>(x.size()) * std::log(sigma);
  for (double v : x) {
    const double z = (v - mu) / sigma;
    if (1.0 + xi * z <= 0.0) return std::numeric_limits<double>::infinity();
    const double l = log1p_over(xi, z);  // log(1 + xi z) / xi
    s += (1.0 + xi) * l + std::exp(-l);
  }
  return s;
}

inline double exceedance_threshold(std::span<const double> sample, double threshold_quantile) {
  require(threshold_quantile > 0.0 && threshold_quantile < 1.0, "threshold quantile must lie in (0, 1)");
  return order_quantile(std::vector<double>(sample.begin(), sample.end()), threshold_quantile);
}

}  // namespace detail

/// Intervals estimator of the extremal index (Ferro and Segers).
inline ExtremalIndexEstimate ferro_segers_theta(std::span<const double> sample, double threshold_quantile = 0.95) {
  const double u = detail::exceedance_threshold(sample, threshold_quantile);
  std::vector<std::size_t> pos;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample[t] > u) pos.push_back(t);
  }
  if (pos.size() < 2) throw degenerate_data_error("extremal index: fewer than 2 exceedances");
  ExtremalIndexEstimate est;
  est.threshold = u;
  est.n_exceed = pos.size();
  for (std::size_t i = 1; i < pos.size(); ++i) est.interexceedance_times.push_back(pos[i] - pos[i - 1]);
  const auto& t = est.interexceedance_times;
  const double m = static_cast<double>(t.size());
  const std::size_t tmax = *std::max_element(t.begin(), t.end());
  double theta;
  if (tmax <= 2) {
    double s1 = 0.0, s2 = 0.0;
    for (auto v : t) {
      s1 += double(v);
      s2 += double(v) * double(v);
    }
    theta = 2.0 * s1 * s1 / (m * s2);
  } else {
    double s1 = 0.0, s2 = 0.0;
    for (auto v : t) {
      s1 += double(v) - 1.0;
      s2 += (double(v) - 1.0) * (double(v) - 2.0);
    }
    theta = 2.0 * s1 * s1 / (m * s2);
  }
  est.theta = std::min(1.0, theta);
  return est;
}

/// Intervals declustering: the C - 1 largest interexceedance times, with
/// C = max(1, floor(theta n_exceed)), split exceedances into C clusters.
/// theta defaults to the intervals estimate; a supplied value overrides it.
inline Declustering decluster_intervals(std::span<const double> sample, double threshold_quantile = 0.95,
                                        std::optional<double> theta = std::nullopt) {
  auto est = ferro_segers_theta(sample, threshold_quantile);
  if (theta) {
    require(*theta > 0.0 && *theta <= 1.0, "decluster_intervals: theta must lie in (0, 1]");
    est.theta = *theta;
  }
  std::vector<std::size_t> pos;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample[t] > est.threshold) pos.push_back(t);
  }
  const std::size_t n_exceed = pos.size();
  const auto c = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(est.theta * static_cast<double>(n_exceed))));
  // Rank gaps by length, earliest first among ties; the top C - 1 are breaks.
  std::vector<std::size_t> order(est.interexceedance_times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return est.interexceedance_times[a] > est.interexceedance_times[b];
  });
  std::vector<bool> is_break(order.size(), false);
  for (std::size_t i = 0; i + 1 < c && i < order.size(); ++i) is_break[order[i]] = true;

  Declustering out;
  out.theta = est.theta;
  out.threshold = est.threshold;
  out.n_exceed = n_exceed;
  out.clusters.push_back({pos[0]});
  for (std::size_t i = 1; i < n_exceed; ++i) {
    if (is_break[i - 1]) out.clusters.emplace_back();
    out.clusters.back().push_back(pos[i]);
  }
  for (const auto& cl : out.clusters) {
    double m = -std::numeric_limits<double>::infinity();
    for (auto p : cl) m = std::max(m, sample[p]);
    out.maxima.push_back(m);
  }
  return out;
}

/// GPD maximum likelihood for excesses y = x - u > 0. zeta_u is n_exceed / n_total.
inline GpdFit fit_gpd(std::span<const double> excesses, double u = 0.0, std::size_t n_exceed = 0,
                      std::size_t n_total = 0) {
  require(excesses.size() >= 10, "fit_gpd: at least 10 exceedances are required");
  for (double y : excesses) require(y >= 0.0 && std::isfinite(y), "fit_gpd: excesses must be nonnegative");
  const double m = mean(excesses);
  const double v = variance(excesses);
  if (!(v > 0.0)) throw degenerate_data_error("fit_gpd: all excesses are equal");
  if (n_exceed == 0) n_exceed = excesses.size();
  if (n_total == 0) n_total = n_exceed;
  require(n_exceed <= n_total, "fit_gpd: more exceedances than observations");

  // Method-of-moments start.
  const double xi0 = std::clamp(0.5 * (1.0 - m * m / v), -0.4, 0.9);
  const double sigma0 = std::max(1e-12, 0.5 * m * (m * m / v + 1.0));
  auto nll = [&](const std::vector<double>& p) {
    return detail::gpd_nll(std::exp(p[0]), detail::xi_from_free(p[1]), excesses);
  };
  auto r = minimize_simplex(nll, {std::log(sigma0), detail::free_from_xi(xi0)}, {0.2, 0.3});

  GpdFit fit;
  fit.u = u;
  fit.sigma = std::exp(r.x[0]);
  fit.xi = detail::xi_from_free(r.x[1]);
  fit.n_exceed = n_exceed;
  fit.n_clusters = excesses.size();
  fit.zeta_u = static_cast<double>(n_exceed) / static_cast<double>(n_total);
  fit.loglik = -r.value;
  fit.converged = r.converged && std::isfinite(fit.loglik);
  std::function<double(const std::array<double, 2>&)> f = [&](const std::array<double, 2>& p) {
    return detail::gpd_nll(p[0], p[1], excesses);
  };
  if (!detail::inverse_hessian<2>(f, {fit.sigma, fit.xi}, fit.cov)) {
    for (auto& row : fit.cov) row.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

/// Return level exceeded once per T_obs observations:
/// u + (sigma/xi)((T zeta theta)^xi - 1), with a delta-method interval on (sigma, xi).
inline ReturnLevelCi pot_return_level(const GpdFit& fit, double T_obs, double theta = 1.0, double level = 0.95) {
  const double m = T_obs * fit.zeta_u * theta;
  require(m > 1.0, "pot_return_level: T_obs * zeta_u * theta must exceed 1");
  const double L = std::log(m);
  const double t = fit.xi * L;
  double g, dg;  // g = (m^xi - 1)/xi, dg = d g / d xi
  if (std::abs(t) < 1e-6) {
    g = L * (1.0 + t / 2.0 + t * t / 6.0);
    dg = L * L * (0.5 + t / 3.0);
  } else {
    g = std::expm1(t) / fit.xi;
    dg = (L * std::exp(t) - g) / fit.xi;
  }
  ReturnLevelCi r;
  r.z = fit.u + fit.sigma * g;
  const double grad[2] = {g, fit.sigma * dg};
  double var = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) var += grad[i] * fit.cov[i][j] * grad[j];
  }
  r.se = std::sqrt(std::max(0.0, var));
  const double zq = std::sqrt(2.0) * boost::math::erfc_inv(1.0 - level);
  r.low = r.z - zq * r.se;
  r.high = r.z + zq * r.se;
  return r;
}

/// Maxima of disjoint consecutive blocks; a trailing partial block is dropped.
inline std::vector<double> block_maxima(std::span<const double> sample, std::size_t block_length) {
  require(block_length >= 1 && block_length <= sample.size(), "block_maxima: invalid block length");
  std::vector<double> out;
  for (std::size_t s = 0; s + block_length <= sample.size(); s += block_length) {
    out.push_back(*std::max_element(sample.begin() + static_cast<std::ptrdiff_t>(s),
                                    sample.begin() + static_cast<std::ptrdiff_t>(s + block_length)));
  }
  return out;
}

inline GevFit fit_gev(std::span<const double> maxima, std::size_t block_length = 1, double theta_hat = 1.0) {
  require(maxima.size() >= 20, "fit_gev: at least 20 block maxima are required");
  require(theta_hat > 0.0 && theta_hat <= 1.0, "fit_gev: extremal index must lie in (0, 1]");
  const double v = variance(maxima);
  if (!(v > 0.0)) throw degenerate_data_error("fit_gev: all block maxima are equal");
  const double sigma0 = std::sqrt(6.0 * v) / std::numbers::pi;
  const double mu0 = mean(maxima) - 0.5772156649015329 * sigma0;
  auto nll = [&](const std::vector<double>& p) {
    return detail::gev_nll(mu0 + sigma0 * p[0], std::exp(p[1]), detail::xi_from_free(p[2]), maxima);
  };
  auto r = minimize_simplex(nll, {0.0, std::log(sigma0), detail::free_from_xi(0.1)}, {0.2, 0.2, 0.3});
  GevFit fit;
  fit.mu = mu0 + sigma0 * r.x[0];
  fit.sigma = std::exp(r.x[1]);
  fit.xi = detail::xi_from_free(r.x[2]);
  fit.block_length = block_length;
  fit.theta_hat = theta_hat;
  fit.loglik = -r.value;
  fit.converged = r.converged && std::isfinite(fit.loglik);
  std::function<double(const std::array<double, 3>&)> f = [&](const std::array<double, 3>& p) {
    return detail::gev_nll(p[0], p[1], p[2], maxima);
  };
  if (!detail::inverse_hessian<3>(f, {fit.mu, fit.sigma, fit.xi}, fit.cov)) {
    for (auto& row : fit.cov) row.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

/// GEV quantile mu + (sigma/xi)(y^-xi - 1), y = -log(level).
inline double gev_quantile(double mu, double sigma, double xi, double level) {
  require(level > 0.0 && level < 1.0, "gev_quantile: level must lie in (0, 1)");
  const double ly = std::log(-std::log(level));
  const double t = -xi * ly;
  const double g = std::abs(t) < 1e-10 ? -ly * (1.0 + t / 2.0) : std::expm1(t) / xi;
  return mu + sigma * g;
}

/// Marginal T_obs return level from block maxima: the GEV quantile at
/// (1 - 1/T_obs)^(bl theta), with a delta-method interval on (mu, sigma, xi).
inline ReturnLevelCi block_maxima_return_level(const GevFit& fit, double T_obs, double level = 0.95) {
  require(T_obs > 1.0, "block_maxima_return_level: T_obs must exceed 1");
  const double log_level = static_cast<double>(fit.block_length) * fit.theta_hat * std::log1p(-1.0 / T_obs);
  const double lv = std::exp(log_level);
  require(lv < 1.0, "block_maxima_return_level: quantile level rounds to 1");
  const double ly = std::log(-log_level);
  const double t = -fit.xi * ly;
  double g, dg;  // g = (y^-xi - 1)/xi, dg = d g / d xi
  if (std::abs(t) < 1e-6) {
    g = -ly * (1.0 + t / 2.0 + t * t / 6.0);
    dg = ly * ly * (0.5 + t / 3.0);
  } else {
    g = std::expm1(t) / fit.xi;
    dg = (-ly * std::exp(t) - g) / fit.xi;
  }
  ReturnLevelCi r;
  r.z = fit.mu + fit.sigma * g;
  const double grad[3] = {1.0, g, fit.sigma * dg};
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) var += grad[i] * fit.cov[i][j] * grad[j];
  }
  r.se = std::sqrt(std::max(0.0, var));
  const double zq = std::sqrt(2.0) * boost::math::erfc_inv(1.0 - level);
  r.low = r.z - zq * r.se;
  r.high = r.z + zq * r.se;
  return r;
}

}  // namespace stablesums
