#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stablesums/error.hpp"
#include "stablesums/multi_series.hpp"
#include "stablesums/parallel.hpp"
#include "stablesums/random.hpp"
#include "stablesums/stable/density.hpp"
#include "stablesums/stable/fit.hpp"
#include "stablesums/stable/random.hpp"
#include "stablesums/stats.hpp"
#include "stablesums/tail_index.hpp"

namespace stablesums {

struct BlockSumSeries {
  std::vector<double> sums;
  std::size_t b = 1;
  double p = 1.0;
  std::size_t n_used = 0;
  std::size_t discarded = 0;
};

/// S_i = sum over the i-th disjoint window of length b of |X_t|^p, with
/// |.| the supremum norm. A trailing partial window is dropped.
inline BlockSumSeries block_sums(const MultiSeries& series, std::size_t b, double p) {
  require(b >= 1 && b <= series.rows(), "block_sums: need 1 <= b <= n");
  require(p > 0.0, "block_sums: p must be positive");
  BlockSumSeries out;
  out.b = b;
  out.p = p;
  const std::size_t blocks = series.rows() / b;
  out.n_used = blocks * b;
  out.discarded = series.rows() - out.n_used;
  out.sums.assign(blocks, 0.0);
  for (std::size_t i = 0; i < blocks; ++i) {
    double s = 0.0;
    for (std::size_t t = i * b; t < (i + 1) * b; ++t) s += std::pow(series.norm(t), p);
    out.sums[i] = s;
  }
  return out;
}

/// Outcome of the a = 1 gate on one (alpha_hat, b) pair.
struct StableSumsTest {
  BlockSumSeries sums;
  StableFit free_fit;
  StableFit constrained_fit;
  LrtResult lrt;
};

struct ReturnLevelEstimate {
  std::vector<double> z;  ///< empty when the a = 1 test rejects
  double T_obs = 0.0;
  std::vector<double> ci_low, ci_high;
  bool accepted = false;
  StableFit stable_fit;
  StableFit free_fit;
  LrtResult lrt;
  double alpha_hat = 0.0;
  std::size_t b = 0;
  std::size_t k = 0;  ///< order-statistic count behind alpha_hat, when known
  SpatialIndexes m_hat;
  std::size_t n_blocks = 0;
};

struct BootstrapOptions {
  std::size_t R = 100;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

enum class BlockPolicy { PaperMinPvalue, MaxPvalue, FirstAccepted };

inline std::string to_string(BlockPolicy p) {
  switch (p) {
    case BlockPolicy::PaperMinPvalue: return "paper_min_pvalue";
    case BlockPolicy::MaxPvalue: return "max_pvalue";
    case BlockPolicy::FirstAccepted: return "first_accepted";
  }
  return "unknown";
}

inline BlockPolicy block_policy_from_string(const std::string& s) {
  if (s == "paper_min_pvalue") return BlockPolicy::PaperMinPvalue;
  if (s == "max_pvalue") return BlockPolicy::MaxPvalue;
  if (s == "first_accepted") return BlockPolicy::FirstAccepted;
  throw precondition_error("unknown block policy '" + s + "'");
}

struct BlockSelection {
  std::vector<std::size_t> candidates;  ///< sorted, without duplicates
  std::vector<double> p_values;  ///< NaN where the fits failed
  std::vector<bool> accepted_mask;
  std::vector<bool> evaluated;  ///< false past the scan's stopping point
  std::optional<std::size_t> chosen;
  BlockPolicy policy = BlockPolicy::PaperMinPvalue;
};

struct SelectionOptions {
  /// Only lengths strictly above this are eligible for the choice.
  std::size_t min_block = 32;
  /// Only the first this-many eligible acceptances are compared.
  std::size_t max_acceptances = 20;
  unsigned workers = 0;
};

enum class QqMode { Radial, MarginalMv, MarginalUv };

inline std::string to_string(QqMode m) {
  switch (m) {
    case QqMode::Radial: return "radial";
    case QqMode::MarginalMv: return "marginal_mv";
    case QqMode::MarginalUv: return "marginal_uv";
  }
  return "unknown";
}

struct QqTable {
  QqMode mode = QqMode::Radial;
  std::size_t coordinate = 0;
  std::vector<double> levels;
  std::vector<double> empirical;
  std::vector<double> theoretical;
};

namespace detail {

/// log of the block-sum quantile level (1 - 1/(T m))^b.
inline double log_return_level(double T_obs, double m, std::size_t b) {
  require(T_obs * m > 1.0, "return level: T_obs * m_hat(j) must exceed 1");
  return static_cast<double>(b) * std::log1p(-1.0 / (T_obs * m));
}

inline double level_from_log(double log_level) {
  const double level = std::exp(log_level);
  if (!(level < 1.0)) throw precondition_error("return level: quantile level rounds to 1 in double precision");
  return level;
}

/// (mu0 + sigma q0)^(1/alpha) for the a = 1, beta = 1 law with standardized quantile q0.
inline double root_of_quantile(const StableParams& params, double q0, double alpha_hat) {
  const StableParams p0 = to_s0(params);
  const double q = p0.mu + p0.sigma * q0;
  if (!(q > 0.0)) throw convergence_error("return level: stable quantile is not positive");
  return std::pow(q, 1.0 / alpha_hat);
}

/// Standardized S0 quantiles of the accepted a = 1, beta = 1 law, one per coordinate.
inline std::vector<double> standard_levels(double T_obs, const SpatialIndexes& m_hat, std::size_t b) {
  std::vector<double> q0;
  for (double m : m_hat.m) q0.push_back(standard_quantile(1.0, 1.0, level_from_log(log_return_level(T_obs, m, b))));
  return q0;
}

}  // namespace detail

/// Free and a = 1 fits on the block sums at p = alpha_hat, with the LRT.
inline StableSumsTest test_stable_sums(const MultiSeries& series, std::size_t b, double alpha_hat) {
  require(alpha_hat > 0.0, "stable sums: alpha_hat must be positive");
  StableSumsTest out;
  out.sums = block_sums(series, b, alpha_hat);
  require(out.sums.sums.size() >= 20, "stable sums: at least 20 blocks are required");
  out.constrained_fit = fit_mle(out.sums.sums, true);
  out.free_fit = fit_mle(out.sums.sums, false);
  if (out.free_fit.loglik < out.constrained_fit.loglik) {
    // The free model nests a = 1; restart from there when the default start
    // ended in a worse local optimum.
    FitOptions o;
    o.start = out.constrained_fit.params;
    auto retry = fit_mle(out.sums.sums, false, o);
    if (retry.loglik > out.free_fit.loglik) out.free_fit = retry;
  }
  if (!out.free_fit.converged || !out.constrained_fit.converged) {
    throw convergence_error("stable sums: likelihood optimization did not converge");
  }
  out.lrt = lrt_a_equals_1(out.free_fit, out.constrained_fit);
  return out;
}

/// z(j) = q(theta, (1 - 1/(T m(j)))^b)^(1/alpha_hat) for the given a = 1 fit.
inline std::vector<double> return_levels_from_fit(const StableFit& fit, std::size_t b, double alpha_hat,
                                                  const SpatialIndexes& m_hat, double T_obs) {
  require(fit.constrained_a1, "return levels: expected the a = 1 fit");
  const auto q0 = detail::standard_levels(T_obs, m_hat, b);
  std::vector<double> z;
  for (double q : q0) z.push_back(detail::root_of_quantile(fit.params, q, alpha_hat));
  return z;
}

/// Percentile bootstrap from the fitted a = 1 law for several return periods
/// at once. Row t of the result holds (low, high) per coordinate for T_obs[t].
inline std::vector<std::pair<std::vector<double>, std::vector<double>>> bootstrap_ci_multi(
    const StableFit& fit, std::size_t b, std::size_t n_blocks, const SpatialIndexes& m_hat, double alpha_hat,
    const std::vector<double>& T_obs, const BootstrapOptions& opts = {}) {
  require(fit.constrained_a1, "bootstrap: expected the accepted a = 1 fit");
  require(opts.R >= 1, "bootstrap: R must be at least 1");
  require(opts.level > 0.0 && opts.level < 1.0, "bootstrap: level must lie in (0, 1)");
  require(n_blocks >= 20, "bootstrap: at least 20 blocks are required");
  const std::size_t d = m_hat.m.size();
  std::vector<std::vector<double>> q0;
  for (double T : T_obs) q0.push_back(detail::standard_levels(T, m_hat, b));

  // z[r][t * d + j]; empty when replicate r failed.
  std::vector<std::vector<double>> z(opts.R);
  parallel_for(
      opts.R,
      [&](std::size_t r) {
        try {
          const auto x = sample(fit.params, n_blocks, derive_seed({opts.seed, r}));
          FitOptions fo;
          fo.start = fit.params;
          const auto refit = fit_mle(x, true, fo);
          if (!refit.converged) return;
          std::vector<double> row;
          for (std::size_t t = 0; t < T_obs.size(); ++t) {
            for (std::size_t j = 0; j < d; ++j) row.push_back(detail::root_of_quantile(refit.params, q0[t][j], alpha_hat));
          }
          z[r] = std::move(row);
        } catch (const std::exception&) {
          // counted as a failed replicate below
        }
      },
      opts.workers);

  std::size_t ok = 0;
  for (const auto& row : z) ok += row.empty() ? 0 : 1;
  if (static_cast<double>(opts.R - ok) > 0.2 * static_cast<double>(opts.R) || ok == 0) {
    throw convergence_error("bootstrap: more than 20% of the replicate fits failed");
  }
  const double lo_level = (1.0 - opts.level) / 2.0;
  const double hi_level = 1.0 - lo_level;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  for (std::size_t t = 0; t < T_obs.size(); ++t) {
    std::vector<double> low(d), high(d);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> v;
      for (const auto& row : z) {
        if (!row.empty()) v.push_back(row[t * d + j]);
      }
      std::sort(v.begin(), v.end());
      low[j] = quantile_sorted(v, lo_level);
      high[j] = quantile_sorted(v, hi_level);
    }
    out.emplace_back(std::move(low), std::move(high));
  }
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> bootstrap_ci(const StableFit& fit, std::size_t b,
                                                                       std::size_t n_blocks,
                                                                       const SpatialIndexes& m_hat, double alpha_hat,
                                                                       double T_obs, const BootstrapOptions& opts = {}) {
  return bootstrap_ci_multi(fit, b, n_blocks, m_hat, alpha_hat, {T_obs}, opts).front();
}

/// Return levels for several periods: one test, one set of fits, and
/// (when opts.R > 0) one bootstrap shared by all periods.
inline std::vector<ReturnLevelEstimate> estimate_return_levels_multi(const MultiSeries& series, std::size_t b,
                                                                     double alpha_hat, const SpatialIndexes& m_hat,
                                                                     const std::vector<double>& T_obs,
                                                                     const BootstrapOptions& opts = {}) {
  require(m_hat.m.size() == series.dim(), "stable sums: m_hat has the wrong dimension");
  for (double T : T_obs) {
    for (double m : m_hat.m) require(T * m > 1.0, "stable sums: T_obs * m_hat(j) must exceed 1");
  }
  const auto test = test_stable_sums(series, b, alpha_hat);
  std::vector<ReturnLevelEstimate> out(T_obs.size());
  for (std::size_t t = 0; t < T_obs.size(); ++t) {
    auto& e = out[t];
    e.T_obs = T_obs[t];
    e.alpha_hat = alpha_hat;
    e.b = b;
    e.m_hat = m_hat;
    e.free_fit = test.free_fit;
    e.stable_fit = test.constrained_fit;
    e.lrt = test.lrt;
    e.accepted = !test.lrt.reject_at_05;
    e.n_blocks = test.sums.sums.size();
    if (e.accepted) e.z = return_levels_from_fit(test.constrained_fit, b, alpha_hat, m_hat, T_obs[t]);
  }
  if (out.front().accepted && opts.R > 0) {
    const auto ci = bootstrap_ci_multi(test.constrained_fit, b, test.sums.sums.size(), m_hat, alpha_hat, T_obs, opts);
    for (std::size_t t = 0; t < T_obs.size(); ++t) {
      out[t].ci_low = ci[t].first;
      out[t].ci_high = ci[t].second;
    }
  }
  return out;
}

inline ReturnLevelEstimate estimate_return_levels(const MultiSeries& series, std::size_t b, double alpha_hat,
                                                  const SpatialIndexes& m_hat, double T_obs,
                                                  const BootstrapOptions& opts = {}) {
  return estimate_return_levels_multi(series, b, alpha_hat, m_hat, {T_obs}, opts).front();
}

/// Scans candidates in increasing order, running the LRT on each, and stops
/// once max_acceptances eligible (b > min_block) acceptances are found. Later
/// candidates are left unevaluated. The policy then picks among those
/// acceptances.
inline BlockSelection select_block_length(const MultiSeries& series, double alpha_hat,
                                          const std::vector<std::size_t>& candidates, BlockPolicy policy,
                                          const SelectionOptions& opts = {}) {
  require(!candidates.empty(), "select_block_length: no candidates");
  for (auto b : candidates) {
    require(b >= 2 && series.rows() / b >= 20, "select_block_length: each candidate needs b >= 2 and n/b >= 20");
  }
  require(opts.max_acceptances >= 1, "select_block_length: max_acceptances must be positive");
  BlockSelection sel;
  sel.candidates = candidates;
  std::stable_sort(sel.candidates.begin(), sel.candidates.end());
  sel.candidates.erase(std::unique(sel.candidates.begin(), sel.candidates.end()), sel.candidates.end());
  sel.policy = policy;
  const std::size_t nc = sel.candidates.size();
  sel.p_values.assign(nc, std::numeric_limits<double>::quiet_NaN());
  sel.accepted_mask.assign(nc, false);
  sel.evaluated.assign(nc, false);

  const unsigned workers = opts.workers == 0 ? default_worker_count() : opts.workers;
  const std::size_t batch = std::max<std::size_t>(1, workers);
  std::vector<char> accepted(nc, 0);
  std::size_t eligible_hits = 0, next = 0, stop = nc;
  while (next < nc && stop == nc) {
    const std::size_t end = std::min(nc, next + batch);
    parallel_for(
        end - next,
        [&](std::size_t i) {
          const std::size_t c = next + i;
          try {
            const auto t = test_stable_sums(series, sel.candidates[c], alpha_hat);
            sel.p_values[c] = t.lrt.p_value;
            accepted[c] = t.lrt.reject_at_05 ? 0 : 1;
          } catch (const convergence_error&) {
            // left as NaN / not accepted
          }
        },
        workers);
    for (std::size_t c = next; c < end; ++c) {
      sel.evaluated[c] = true;
      sel.accepted_mask[c] = accepted[c] != 0;
      if (sel.accepted_mask[c] && sel.candidates[c] > opts.min_block && ++eligible_hits == opts.max_acceptances) {
        stop = c + 1;
        break;
      }
    }
    next = end;
  }
  // Results past the stopping point depend on the batch size; drop them.
  for (std::size_t c = stop; c < nc; ++c) {
    sel.evaluated[c] = false;
    sel.accepted_mask[c] = false;
    sel.p_values[c] = std::numeric_limits<double>::quiet_NaN();
  }

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < stop; ++c) {
    if (!sel.accepted_mask[c] || sel.candidates[c] <= opts.min_block) continue;
    if (!best || (policy == BlockPolicy::PaperMinPvalue && sel.p_values[c] < sel.p_values[*best]) ||
        (policy == BlockPolicy::MaxPvalue && sel.p_values[c] > sel.p_values[*best])) {
      best = c;
    }
  }
  if (best) sel.chosen = sel.candidates[*best];
  return sel;
}

/// Quantile-quantile pairs on the 1/alpha_hat scale.
///   Radial: sorted S_i^(1/alpha) against fitted quantiles at i/(N+1).
///   MarginalMv: top floor(m(j) n/b) order statistics of coordinate j against
///     fitted quantiles at 1 - k/(m(j) n/b).
///   MarginalUv: as MarginalMv with m(j) = 1; fit is the coordinate-only fit.
/// Negative fitted quantiles keep their sign under the root.
inline QqTable qq_stable_diagnostics(const MultiSeries& series, const StableFit& fit, std::size_t b,
                                     double alpha_hat, const SpatialIndexes& m_hat, QqMode mode,
                                     std::size_t coordinate = 0) {
  require(alpha_hat > 0.0, "qq: alpha_hat must be positive");
  require(b >= 1 && b <= series.rows(), "qq: invalid block length");
  QqTable out;
  out.mode = mode;
  out.coordinate = coordinate;
  const StableParams p0 = to_s0(fit.params);
  auto root = [&](double level) {
    const double q = p0.mu + p0.sigma * standard_quantile(p0.a, p0.beta, level);
    return std::copysign(std::pow(std::abs(q), 1.0 / alpha_hat), q);
  };
  const double per_block = static_cast<double>(series.rows()) / static_cast<double>(b);
  if (mode == QqMode::Radial) {
    auto s = block_sums(series, b, alpha_hat).sums;
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double level = static_cast<double>(i + 1) / (n + 1.0);
      out.levels.push_back(level);
      out.empirical.push_back(std::pow(s[i], 1.0 / alpha_hat));
      out.theoretical.push_back(root(level));
    }
    return out;
  }
  require(coordinate < series.dim(), "qq: coordinate out of range");
  const double m = mode == QqMode::MarginalMv ? m_hat.m.at(coordinate) : 1.0;
  const double effective = m * per_block;
  if (effective < 3.0) throw degenerate_data_error("qq: too few points for this coordinate (m(j) n/b < 3)");
  const auto count = static_cast<std::size_t>(std::floor(effective));
  auto x = series.column(coordinate);
  std::sort(x.begin(), x.end(), std::greater<>());
  for (std::size_t k = 1; k <= count && k <= x.size(); ++k) {
    const double level = 1.0 - static_cast<double>(k) / effective;
    if (!(level > 0.0)) break;
    out.levels.push_back(level);
    out.empirical.push_back(x[k - 1]);
    out.theoretical.push_back(root(level));
  }
  return out;
}

}  // namespace stablesums
