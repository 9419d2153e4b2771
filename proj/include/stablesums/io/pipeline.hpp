#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablesums/classical.hpp"
#include "stablesums/error.hpp"
#include "stablesums/io/json.hpp"
#include "stablesums/io/station_table.hpp"
#include "stablesums/random.hpp"
#include "stablesums/stable_sums.hpp"
#include "stablesums/tail_index.hpp"

namespace stablesums::io {

struct PipelineConfig {
  std::vector<std::size_t> k_values{150, 250, 350, 450, 550};
  std::size_t min_block = 32;
  std::size_t max_acceptances = 20;
  double threshold_quantile = 0.95;
  std::vector<double> T_years{20.0, 50.0, 100.0};
  std::size_t obs_per_year = 100;
  std::size_t bootstrap_R = 100;
  std::uint64_t seed = 0;
  BlockPolicy policy = BlockPolicy::PaperMinPvalue;
  std::size_t extremogram_max_lag = 20;
  bool classical = true;
  RhoEstimator rho = RhoEstimator::LogMoments;
  RhoRule rho_rule = RhoRule::LargeK;
  unsigned workers = 0;
};

inline void validate(const PipelineConfig& c) {
  require(!c.k_values.empty(), "pipeline: k_values must be nonempty");
  for (auto k : c.k_values) require(k >= 10, "pipeline: every k must be at least 10");
  require(c.min_block >= 1 && c.max_acceptances >= 1 && c.obs_per_year >= 1 && c.bootstrap_R >= 1,
          "pipeline: counts must be positive");
  require(c.threshold_quantile > 0.5 && c.threshold_quantile < 1.0, "pipeline: threshold_quantile must lie in (0.5, 1)");
  require(!c.T_years.empty(), "pipeline: T_years must be nonempty");
  for (double T : c.T_years) require(T > 0.0, "pipeline: T_years must be positive");
}

struct ClassicalAtK {
  std::size_t station = 0;
  std::optional<GpdFit> pot_fit;
  double pot_theta = 1.0;
  std::vector<ReturnLevelCi> pot;  ///< one per T
  std::optional<GevFit> bm_fit;
  std::vector<ReturnLevelCi> bm;
  std::vector<std::string> errors;
};

struct PipelineAtK {
  std::size_t k = 0;
  std::optional<TailFit> tail;
  std::optional<SpatialIndexes> m_hat;
  std::optional<BlockSelection> selection;
  std::vector<ReturnLevelEstimate> estimates;  ///< one per T when a block length was chosen
  std::optional<QqTable> qq_radial;
  std::vector<QqTable> qq_marginal_mv;
  std::vector<QqTable> qq_marginal_uv;
  std::vector<ClassicalAtK> classical;
  std::vector<std::string> errors;
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<std::string> station_names;
  std::size_t n_rows = 0;
  std::size_t n_dropped = 0;
  std::vector<double> T_obs;
  std::optional<Extremogram> extremogram_norm;
  std::vector<Extremogram> extremogram_stations;
  std::vector<PipelineAtK> per_k;
};

/// Case-study analysis of a station table as a function of k.
inline PipelineReport run_case_study_pipeline(const StationTable& table, const PipelineConfig& config) {
  validate(config);
  const MultiSeries x = table.complete();
  require(x.dim() >= 1, "pipeline: the table has no stations");
  require(x.rows() >= 500, "pipeline: at least 500 complete rows are required");
  const std::size_t n = x.rows(), d = x.dim();

  PipelineReport rep;
  rep.config = config;
  rep.station_names = x.labels();
  rep.n_rows = n;
  rep.n_dropped = table.incomplete_rows();
  for (double T : config.T_years) rep.T_obs.push_back(T * static_cast<double>(config.obs_per_year));

  const std::size_t max_lag = std::min(config.extremogram_max_lag, n / 4 - 1);
  try {
    rep.extremogram_norm = extremogram(x, max_lag, config.threshold_quantile);
    for (std::size_t j = 0; j < d; ++j) {
      const auto col = x.column(j);
      rep.extremogram_stations.push_back(extremogram(std::span<const double>(col), max_lag, config.threshold_quantile));
    }
  } catch (const precondition_error&) {
  }

  std::vector<std::size_t> candidates;
  for (std::size_t b = config.min_block + 1; n / b >= 20; ++b) candidates.push_back(b);
  const auto norms = x.norms();

  for (auto k : config.k_values) {
    PipelineAtK at;
    at.k = k;
    if (k >= n) {
      at.errors.push_back("k must be smaller than the number of rows");
      rep.per_k.push_back(std::move(at));
      continue;
    }
    try {
      at.tail = unbiased_hill(norms, k, config.rho, config.rho_rule);
      at.m_hat = spatial_indexes(x, at.tail->alpha_hat, config.threshold_quantile);
      const double alpha = at.tail->alpha_hat;
      bool usable = true;
      for (double T : rep.T_obs) {
        for (double m : at.m_hat->m) usable = usable && T * m > 1.0;
      }
      if (!usable) throw precondition_error("T_obs * m_hat(j) must exceed 1");
      if (!candidates.empty()) {
        SelectionOptions so;
        so.min_block = config.min_block;
        so.max_acceptances = config.max_acceptances;
        so.workers = config.workers;
        at.selection = select_block_length(x, alpha, candidates, config.policy, so);
      }
      if (at.selection && at.selection->chosen) {
        const std::size_t b = *at.selection->chosen;
        BootstrapOptions bo;
        bo.R = config.bootstrap_R;
        bo.seed = derive_seed({config.seed, k});
        bo.workers = config.workers;
        at.estimates = estimate_return_levels_multi(x, b, alpha, *at.m_hat, rep.T_obs, bo);
        for (auto& e : at.estimates) e.k = k;
        const auto& fit = at.estimates.front().stable_fit;
        at.qq_radial = qq_stable_diagnostics(x, fit, b, alpha, *at.m_hat, QqMode::Radial);
        for (std::size_t j = 0; j < d; ++j) {
          try {
            at.qq_marginal_mv.push_back(qq_stable_diagnostics(x, fit, b, alpha, *at.m_hat, QqMode::MarginalMv, j));
            const auto uv = fit_mle(block_sums(x.select_column(j), b, alpha).sums, true);
            at.qq_marginal_uv.push_back(qq_stable_diagnostics(x, uv, b, alpha, *at.m_hat, QqMode::MarginalUv, j));
          } catch (const std::exception& ex) {
            at.errors.push_back("qq station " + x.labels()[j] + ": " + ex.what());
          }
        }
      }
    } catch (const std::exception& ex) {
      at.errors.push_back(ex.what());
    }

    if (config.classical) {
      for (std::size_t j = 0; j < d; ++j) {
        ClassicalAtK c;
        c.station = j;
        const auto col = x.column(j);
        try {
          const double tq = 1.0 - static_cast<double>(k) / static_cast<double>(n);
          const auto dc = decluster_intervals(col, tq);
          std::vector<double> excess;
          for (double v : dc.maxima) excess.push_back(v - dc.threshold);
          c.pot_fit = fit_gpd(excess, dc.threshold, dc.n_exceed, n);
          c.pot_theta = dc.theta;
          for (double T : rep.T_obs) c.pot.push_back(pot_return_level(*c.pot_fit, T, dc.theta));
        } catch (const std::exception& ex) {
          c.errors.push_back(std::string("pot: ") + ex.what());
        }
        try {
          const std::size_t bl = std::max<std::size_t>(1, n / k);
          const double theta = ferro_segers_theta(col, config.threshold_quantile).theta;
          c.bm_fit = fit_gev(block_maxima(col, bl), bl, theta);
          for (double T : rep.T_obs) c.bm.push_back(block_maxima_return_level(*c.bm_fit, T));
        } catch (const std::exception& ex) {
          c.errors.push_back(std::string("block_maxima: ") + ex.what());
        }
        at.classical.push_back(std::move(c));
      }
    }
    rep.per_k.push_back(std::move(at));
  }
  return rep;
}

inline json to_json(const PipelineConfig& c) {
  return {{"k_values", c.k_values},
          {"min_block", c.min_block},
          {"max_acceptances", c.max_acceptances},
          {"threshold_quantile", c.threshold_quantile},
          {"T_years", c.T_years},
          {"obs_per_year", c.obs_per_year},
          {"bootstrap_R", c.bootstrap_R},
          {"seed", c.seed},
          {"policy", to_string(c.policy)},
          {"extremogram_max_lag", c.extremogram_max_lag},
          {"classical", c.classical},
          {"rho_estimator", c.rho == RhoEstimator::LogMoments ? "log_moments" : "power_moments"},
          {"rho_rule", to_string(c.rho_rule)}};
}

/// Every block carries the (k, b, alpha_hat) it was computed under.
inline json to_json(const PipelineReport& r) {
  json out = {{"schema_version", kSchemaVersion},
              {"config", to_json(r.config)},
              {"stations", r.station_names},
              {"n_rows", r.n_rows},
              {"n_dropped_incomplete", r.n_dropped},
              {"T_obs", r.T_obs}};
  if (r.extremogram_norm) out["extremogram"] = {{"norm", *r.extremogram_norm}, {"stations", r.extremogram_stations}};
  json per_k = json::array();
  for (const auto& at : r.per_k) {
    json e = {{"k", at.k}, {"errors", at.errors}};
    const json alpha = at.tail ? json(at.tail->alpha_hat) : json(nullptr);
    const json b = at.selection && at.selection->chosen ? json(*at.selection->chosen) : json(nullptr);
    e["alpha_hat"] = alpha;
    e["b"] = b;
    if (at.tail) e["tail_fit"] = *at.tail;
    if (at.m_hat) e["m_hat"] = *at.m_hat;
    if (at.selection) e["block_selection"] = *at.selection;
    e["estimates"] = at.estimates;
    auto tag = [&](json q) {
      q["k"] = at.k;
      q["b"] = b;
      q["alpha_hat"] = alpha;
      return q;
    };
    json qq = json::array();
    if (at.qq_radial) qq.push_back(tag(*at.qq_radial));
    for (const auto& q : at.qq_marginal_mv) qq.push_back(tag(q));
    for (const auto& q : at.qq_marginal_uv) qq.push_back(tag(q));
    e["qq"] = qq;
    json cl = json::array();
    for (const auto& c : at.classical) {
      json cj = {{"station", r.station_names[c.station]}, {"k", at.k}, {"errors", c.errors}};
      if (c.pot_fit) cj["pot"] = {{"fit", *c.pot_fit}, {"theta", c.pot_theta}, {"return_levels", c.pot}};
      if (c.bm_fit) cj["block_maxima"] = {{"fit", *c.bm_fit}, {"return_levels", c.bm}};
      cl.push_back(cj);
    }
    e["classical"] = cl;
    per_k.push_back(e);
  }
  out["per_k"] = per_k;
  return out;
}

}  // namespace stablesums::io
