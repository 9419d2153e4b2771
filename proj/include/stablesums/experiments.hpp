#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablesums/classical.hpp"
#include "stablesums/error.hpp"
#include "stablesums/parallel.hpp"
#include "stablesums/random.hpp"
#include "stablesums/simulators.hpp"
#include "stablesums/stable_sums.hpp"
#include "stablesums/stats.hpp"
#include "stablesums/tail_index.hpp"

namespace stablesums {

enum class Method { Stable, Pot, BlockMaxima };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Stable: return "stable";
    case Method::Pot: return "pot";
    case Method::BlockMaxima: return "block_maxima";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  if (s == "stable") return Method::Stable;
  if (s == "pot") return Method::Pot;
  if (s == "block_maxima") return Method::BlockMaxima;
  throw precondition_error("unknown method '" + s + "' (expected stable, pot or block_maxima)");
}

struct McConfig {
  ModelSpec model;
  std::size_t n = 4000;
  std::size_t n_reps = 200;
  std::vector<double> T_years{20.0, 50.0, 100.0};
  std::size_t obs_per_year = 100;
  std::vector<Method> methods{Method::Stable, Method::Pot, Method::BlockMaxima};
  std::vector<std::size_t> block_lengths{16, 32, 64, 128};
  double k_exponent = 0.9;
  std::uint64_t seed = 0;
  std::size_t R_bootstrap = 100;
  /// For d > 1, also run the coordinate-only stable sums estimator.
  bool univariate_too = true;
  double threshold_quantile = 0.95;
  std::size_t bm_block_length = 20;
  double ci_level = 0.95;
  RhoEstimator rho = RhoEstimator::LogMoments;
  RhoRule rho_rule = RhoRule::LargeK;
  unsigned workers = 0;
};

inline void validate(const McConfig& c) {
  validate(c.model);
  require(c.n_reps >= 1, "McConfig: n_reps must be at least 1");
  require(c.obs_per_year >= 1, "McConfig: obs_per_year must be at least 1");
  require(!c.T_years.empty() && !c.methods.empty(), "McConfig: T_years and methods must be nonempty");
  require(c.k_exponent > 0.0 && c.k_exponent < 1.0, "McConfig: k_exponent must lie in (0, 1)");
  std::size_t bmax = c.bm_block_length;
  for (auto b : c.block_lengths) bmax = std::max(bmax, b);
  for (double T : c.T_years) {
    require(T * static_cast<double>(c.obs_per_year) > static_cast<double>(bmax),
            "McConfig: every T_years * obs_per_year must exceed the largest block length");
  }
}

/// One (method, variant, block length, T) cell. Estimates are kept per
/// replicate so paired comparisons across cells are possible.
struct McCell {
  Method method = Method::Stable;
  std::string variant;  ///< "mv" or "uv" for stable sums, empty otherwise
  std::size_t b = 0;    ///< sum length, or block length for block maxima
  double T_years = 0.0;
  double T_obs = 0.0;
  std::vector<double> truth;  ///< per coordinate
  std::size_t n_reps = 0;
  std::vector<std::size_t> n_failed;  ///< per coordinate
  std::vector<std::size_t> n_accepted;
  std::vector<std::size_t> n_covered;
  /// estimates[j][r]: accepted estimate of coordinate j in replicate r.
  std::vector<std::vector<std::optional<double>>> estimates;
  double runtime_seconds = 0.0;

  /// Covered / accepted, pooled over coordinates.
  double coverage() const;
  /// Covered / successful replicates, rejected ones counting as misses.
  double coverage_all() const;
  double acceptance_rate() const;
  double coverage(std::size_t j) const;
  double acceptance_rate(std::size_t j) const;
  std::vector<double> bias() const;
  std::vector<double> variance() const;
  std::vector<double> mse() const;
  std::vector<double> accepted_estimates(std::size_t j) const;
};

struct McSummary {
  McConfig config;
  std::vector<McCell> cells;

  const McCell* find(Method m, std::size_t b, double T_years, const std::string& variant = "") const {
    for (const auto& c : cells) {
      if (c.method == m && c.b == b && c.T_years == T_years && c.variant == variant) return &c;
    }
    return nullptr;
  }
};

inline std::vector<double> McCell::accepted_estimates(std::size_t j) const {
  std::vector<double> v;
  for (const auto& e : estimates.at(j)) {
    if (e) v.push_back(*e);
  }
  return v;
}

inline double McCell::coverage(std::size_t j) const {
  return n_accepted[j] == 0 ? std::nan("") : static_cast<double>(n_covered[j]) / static_cast<double>(n_accepted[j]);
}

inline double McCell::acceptance_rate(std::size_t j) const {
  const std::size_t ok = n_reps - n_failed[j];
  return ok == 0 ? std::nan("") : static_cast<double>(n_accepted[j]) / static_cast<double>(ok);
}

inline double McCell::coverage() const {
  std::size_t acc = 0, cov = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    acc += n_accepted[j];
    cov += n_covered[j];
  }
  return acc == 0 ? std::nan("") : static_cast<double>(cov) / static_cast<double>(acc);
}

inline double McCell::coverage_all() const {
  std::size_t ok = 0, cov = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    ok += n_reps - n_failed[j];
    cov += n_covered[j];
  }
  return ok == 0 ? std::nan("") : static_cast<double>(cov) / static_cast<double>(ok);
}

inline double McCell::acceptance_rate() const {
  std::size_t ok = 0, acc = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    ok += n_reps - n_failed[j];
    acc += n_accepted[j];
  }
  return ok == 0 ? std::nan("") : static_cast<double>(acc) / static_cast<double>(ok);
}

inline std::vector<double> McCell::bias() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto v = accepted_estimates(j);
    out.push_back(v.empty() ? std::nan("") : mean(v) - truth[j]);
  }
  return out;
}

inline std::vector<double> McCell::variance() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto v = accepted_estimates(j);
    out.push_back(v.empty() ? std::nan("") : stablesums::variance(v));
  }
  return out;
}

inline std::vector<double> McCell::mse() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto v = accepted_estimates(j);
    if (v.empty()) {
      out.push_back(std::nan(""));
      continue;
    }
    double s = 0.0;
    for (double x : v) s += (x - truth[j]) * (x - truth[j]);
    out.push_back(s / static_cast<double>(v.size()));
  }
  return out;
}

/// Exact marginal quantile exceeded once per T_obs observations.
inline double true_return_level(const ModelSpec& spec, double T_obs, std::size_t coordinate = 0) {
  require(coordinate < spec.dim(), "true_return_level: coordinate out of range");
  require(T_obs > 1.0, "true_return_level: T_obs must exceed 1");
  return oracle(spec).true_upper_quantile(1.0 / T_obs);
}

enum class ChangeMetric { Mse, Variance, AbsBias };

inline std::string to_string(ChangeMetric m) {
  switch (m) {
    case ChangeMetric::Mse: return "mse";
    case ChangeMetric::Variance: return "variance";
    case ChangeMetric::AbsBias: return "abs_bias";
  }
  return "unknown";
}

namespace detail {

inline double change_metric(std::span<const double> v, double truth, ChangeMetric m) {
  switch (m) {
    case ChangeMetric::Mse: {
      double s = 0.0;
      for (double x : v) s += (x - truth) * (x - truth);
      return s / static_cast<double>(v.size());
    }
    case ChangeMetric::Variance: return variance(v);
    case ChangeMetric::AbsBias: return std::abs(mean(v) - truth);
  }
  return 0.0;
}

/// Stable 64-bit FNV-1a, so model identifiers hash the same everywhere.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t model_id(const ModelSpec& m) {
  std::string s = to_string(m.kind);
  for (double v : {m.c, m.kappa, m.alpha, m.tau}) s += ":" + std::to_string(v);
  for (double l : m.lambda) s += ":" + std::to_string(l);
  return fnv1a(s);
}

}  // namespace detail

/// (metric_UV - metric_MV) / metric_UV * 100. Positive favors the multivariate estimator.
inline double relative_change(std::span<const double> mv, std::span<const double> uv, double truth,
                              ChangeMetric metric = ChangeMetric::Mse) {
  require(mv.size() == uv.size() && mv.size() >= 2, "relative_change: need equal-length vectors of length >= 2");
  const double m_uv = detail::change_metric(uv, truth, metric);
  const double m_mv = detail::change_metric(mv, truth, metric);
  require(m_uv != 0.0, "relative_change: the univariate metric is zero");
  return (m_uv - m_mv) / m_uv * 100.0;
}

struct PairedChange {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::size_t n_pairs = 0;
};

/// Relative change on the replicates where both estimators returned a value,
/// with a percentile bootstrap interval over resampled pairs.
inline PairedChange paired_relative_change(const McCell& mv, const McCell& uv, std::size_t coordinate,
                                           ChangeMetric metric = ChangeMetric::Mse, double level = 0.90,
                                           std::size_t B = 2000, std::uint64_t seed = 0) {
  require(coordinate < mv.truth.size() && coordinate < uv.truth.size(), "paired_relative_change: bad coordinate");
  const auto& a = mv.estimates[coordinate];
  const auto& b = uv.estimates[coordinate];
  require(a.size() == b.size(), "paired_relative_change: cells have different replicate counts");
  std::vector<double> x, y;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r] && b[r]) {
      x.push_back(*a[r]);
      y.push_back(*b[r]);
    }
  }
  require(x.size() >= 2, "paired_relative_change: fewer than 2 paired replicates");
  const double truth = mv.truth[coordinate];
  PairedChange out;
  out.n_pairs = x.size();
  out.estimate = relative_change(x, y, truth, metric);
  Rng rng(seed);
  std::vector<double> boot, bx(x.size()), by(x.size());
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t t = 0; t < x.size(); ++t) {
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(x.size()));
      bx[t] = x[std::min(k, x.size() - 1)];
      by[t] = y[std::min(k, x.size() - 1)];
    }
    if (detail::change_metric(by, truth, metric) != 0.0) boot.push_back(relative_change(bx, by, truth, metric));
  }
  std::sort(boot.begin(), boot.end());
  out.low = quantile_sorted(boot, (1.0 - level) / 2.0);
  out.high = quantile_sorted(boot, (1.0 + level) / 2.0);
  return out;
}

namespace detail {

struct ReplicateOutcome {
  // Indexed like the summary's cells; per coordinate.
  std::vector<std::vector<std::optional<double>>> estimate;
  std::vector<std::vector<char>> failed, accepted, covered;
  std::vector<double> seconds;
};

struct CellKey {
  Method method;
  std::string variant;
  std::size_t b;
  std::size_t t_index;
};

inline std::vector<CellKey> cell_layout(const McConfig& c) {
  std::vector<CellKey> keys;
  for (auto m : c.methods) {
    for (std::size_t t = 0; t < c.T_years.size(); ++t) {
      if (m == Method::Stable) {
        for (auto b : c.block_lengths) {
          keys.push_back({m, "mv", b, t});
          if (c.model.dim() > 1 && c.univariate_too) keys.push_back({m, "uv", b, t});
        }
      } else {
        keys.push_back({m, "", m == Method::BlockMaxima ? c.bm_block_length : 0, t});
      }
    }
  }
  return keys;
}

inline std::size_t hill_k(std::size_t n, double exponent) {
  const auto k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), exponent)));
  return std::clamp<std::size_t>(k, 10, n - 1);
}

}  // namespace detail

/// Simulates n_reps paths and runs every configured estimator on each.
/// Replicate r uses seed derive_seed(master, model id, r) for every method,
/// so cells are paired on identical data. Output is independent of the
/// worker count except for runtime_seconds.
inline McSummary run_coverage_study(const McConfig& config) {
  validate(config);
  const std::size_t d = config.model.dim();
  const auto keys = detail::cell_layout(config);
  std::vector<double> T_obs;
  for (double T : config.T_years) T_obs.push_back(T * static_cast<double>(config.obs_per_year));
  std::vector<std::vector<double>> truth(T_obs.size());
  for (std::size_t t = 0; t < T_obs.size(); ++t) {
    for (std::size_t j = 0; j < d; ++j) truth[t].push_back(true_return_level(config.model, T_obs[t], j));
  }
  auto cell_index = [&](Method m, const std::string& variant, std::size_t b, std::size_t t) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i].method == m && keys[i].variant == variant && keys[i].b == b && keys[i].t_index == t) return i;
    }
    throw precondition_error("internal: missing cell");
  };
  const std::uint64_t mid = detail::model_id(config.model);
  const std::size_t k = detail::hill_k(config.n, config.k_exponent);
  using clock = std::chrono::steady_clock;

  std::vector<detail::ReplicateOutcome> reps(config.n_reps);
  parallel_for(
      config.n_reps,
      [&](std::size_t r) {
        auto& out = reps[r];
        out.estimate.assign(keys.size(), std::vector<std::optional<double>>(d));
        out.failed.assign(keys.size(), std::vector<char>(d, 0));
        out.accepted.assign(keys.size(), std::vector<char>(d, 0));
        out.covered.assign(keys.size(), std::vector<char>(d, 0));
        out.seconds.assign(keys.size(), 0.0);
        const std::uint64_t seed = derive_seed({config.seed, mid, r});
        const auto x = simulate(config.model, config.n, seed);

        auto record = [&](std::size_t cell, std::size_t j, double z, double lo, double hi) {
          out.accepted[cell][j] = 1;
          out.estimate[cell][j] = z;
          const double tr = truth[keys[cell].t_index][j];
          out.covered[cell][j] = lo <= tr && tr <= hi ? 1 : 0;
        };
        auto fail_all = [&](Method m, const std::string& variant, std::size_t b, std::size_t j) {
          for (std::size_t t = 0; t < T_obs.size(); ++t) out.failed[cell_index(m, variant, b, t)][j] = 1;
        };

        // Stable sums on one (sub)series; coords maps its columns to output coordinates.
        auto run_stable = [&](const MultiSeries& s, const std::string& variant, const std::vector<std::size_t>& coords) {
          std::optional<TailFit> tail;
          std::optional<SpatialIndexes> m_hat;
          try {
            tail = unbiased_hill(s.norms(), k, config.rho, config.rho_rule);
            m_hat = spatial_indexes(s, tail->alpha_hat, config.threshold_quantile);
          } catch (const std::exception&) {
          }
          for (auto b : config.block_lengths) {
            const auto start = clock::now();
            try {
              if (!tail) throw degenerate_data_error("tail index failed");
              BootstrapOptions bo;
              bo.R = config.R_bootstrap;
              bo.level = config.ci_level;
              bo.seed = derive_seed({seed, b, coords.front(), variant == "uv" ? 1u : 0u});
              bo.workers = 1;
              const auto est = estimate_return_levels_multi(s, b, tail->alpha_hat, *m_hat, T_obs, bo);
              for (std::size_t t = 0; t < T_obs.size(); ++t) {
                const auto cell = cell_index(Method::Stable, variant, b, t);
                if (!est[t].accepted) continue;
                for (std::size_t jj = 0; jj < coords.size(); ++jj) {
                  record(cell, coords[jj], est[t].z[jj], est[t].ci_low[jj], est[t].ci_high[jj]);
                }
              }
            } catch (const std::exception&) {
              for (auto j : coords) fail_all(Method::Stable, variant, b, j);
            }
            const double secs = std::chrono::duration<double>(clock::now() - start).count();
            for (std::size_t t = 0; t < T_obs.size(); ++t) out.seconds[cell_index(Method::Stable, variant, b, t)] += secs;
          }
        };

        for (auto m : config.methods) {
          if (m == Method::Stable) {
            std::vector<std::size_t> all(d);
            for (std::size_t j = 0; j < d; ++j) all[j] = j;
            run_stable(x, "mv", all);
            if (d > 1 && config.univariate_too) {
              for (std::size_t j = 0; j < d; ++j) run_stable(x.select_column(j), "uv", {j});
            }
            continue;
          }
          const std::size_t b = m == Method::BlockMaxima ? config.bm_block_length : 0;
          for (std::size_t j = 0; j < d; ++j) {
            const auto start = clock::now();
            const auto col = x.column(j);
            try {
              if (m == Method::Pot) {
                const auto dc = decluster_intervals(col, config.threshold_quantile);
                std::vector<double> excess;
                for (double v : dc.maxima) excess.push_back(v - dc.threshold);
                const auto fit = fit_gpd(excess, dc.threshold, dc.n_exceed, col.size());
                if (!fit.converged) throw convergence_error("gpd fit");
                for (std::size_t t = 0; t < T_obs.size(); ++t) {
                  const auto rl = pot_return_level(fit, T_obs[t], dc.theta, config.ci_level);
                  if (!std::isfinite(rl.se)) throw convergence_error("gpd covariance");
                  record(cell_index(m, "", b, t), j, rl.z, rl.low, rl.high);
                }
              } else {
                const double theta = ferro_segers_theta(col, config.threshold_quantile).theta;
                const auto fit = fit_gev(block_maxima(col, b), b, theta);
                if (!fit.converged) throw convergence_error("gev fit");
                for (std::size_t t = 0; t < T_obs.size(); ++t) {
                  const auto rl = block_maxima_return_level(fit, T_obs[t], config.ci_level);
                  if (!std::isfinite(rl.se)) throw convergence_error("gev covariance");
                  record(cell_index(m, "", b, t), j, rl.z, rl.low, rl.high);
                }
              }
            } catch (const std::exception&) {
              for (std::size_t t = 0; t < T_obs.size(); ++t) {
                const auto cell = cell_index(m, "", b, t);
                out.failed[cell][j] = 1;
                out.accepted[cell][j] = 0;
                out.covered[cell][j] = 0;
                out.estimate[cell][j].reset();
              }
            }
            const double secs = std::chrono::duration<double>(clock::now() - start).count();
            for (std::size_t t = 0; t < T_obs.size(); ++t) out.seconds[cell_index(m, "", b, t)] += secs;
          }
        }
      },
      config.workers);

  McSummary summary;
  summary.config = config;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    McCell c;
    c.method = keys[i].method;
    c.variant = keys[i].variant;
    c.b = keys[i].b;
    c.T_years = config.T_years[keys[i].t_index];
    c.T_obs = T_obs[keys[i].t_index];
    c.truth = truth[keys[i].t_index];
    c.n_reps = config.n_reps;
    c.n_failed.assign(d, 0);
    c.n_accepted.assign(d, 0);
    c.n_covered.assign(d, 0);
    c.estimates.assign(d, std::vector<std::optional<double>>(config.n_reps));
    for (std::size_t r = 0; r < config.n_reps; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        c.n_failed[j] += reps[r].failed[i][j];
        c.n_accepted[j] += reps[r].accepted[i][j];
        c.n_covered[j] += reps[r].covered[i][j];
        c.estimates[j][r] = reps[r].estimate[i][j];
      }
      c.runtime_seconds += reps[r].seconds[i];
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (static_cast<double>(c.n_failed[j]) > 0.3 * static_cast<double>(config.n_reps)) {
        throw convergence_error("coverage study: more than 30% of replicates failed in cell " + to_string(c.method) +
                                (c.variant.empty() ? "" : "/" + c.variant) + " b=" + std::to_string(c.b));
      }
    }
    summary.cells.push_back(std::move(c));
  }
  return summary;
}

/// Monte Carlo estimate of pr(S_n(alpha) > x^alpha) / (n pr(|X_0| > x)) with x
/// the exact marginal quantile at `level`, from independent stationary blocks.
struct UnitConstantResult {
  double ratio = 0.0;
  double std_error = 0.0;
  double x = 0.0;
  std::size_t hits = 0;
  std::size_t n_blocks = 0;
};

inline UnitConstantResult unit_constant_ratio(const ModelSpec& spec, std::size_t block, double level,
                                              std::size_t n_blocks, std::uint64_t seed, unsigned workers = 0) {
  validate(spec);
  require(spec.dim() == 1, "unit_constant_ratio: univariate models only");
  require(block >= 1 && n_blocks >= 1 && level > 0.0 && level < 1.0, "unit_constant_ratio: invalid arguments");
  const double alpha = spec.tail_index();
  const double x = oracle(spec).true_quantile(level);
  const double xa = std::pow(x, alpha);
  constexpr std::size_t kChunks = 64;
  std::vector<std::size_t> hits(kChunks, 0);
  parallel_for(
      kChunks,
      [&](std::size_t c) {
        const std::size_t lo = n_blocks * c / kChunks, hi = n_blocks * (c + 1) / kChunks;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto s = simulate(spec, block, derive_seed({seed, i}));
          double sum = 0.0;
          for (double v : s.values()) sum += std::pow(std::abs(v), alpha);
          if (sum > xa) ++hits[c];
        }
      },
      workers);
  UnitConstantResult out;
  out.x = x;
  out.n_blocks = n_blocks;
  for (auto h : hits) out.hits += h;
  const double p = static_cast<double>(out.hits) / static_cast<double>(n_blocks);
  const double denom = static_cast<double>(block) * (1.0 - level);
  out.ratio = p / denom;
  out.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_blocks)) / denom;
  return out;
}

}  // namespace stablesums
