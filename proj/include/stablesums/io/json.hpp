#pragma once

#include <string>
#include <vector>

#include <json.hpp>
#include "stablesums/classical.hpp"
#include "stablesums/experiments.hpp"
#include "stablesums/simulators.hpp"
#include "stablesums/stable/fit.hpp"
#include "stablesums/stable_sums.hpp"
#include "stablesums/tail_index.hpp"

namespace stablesums {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";

inline void to_json(json& j, const StableParams& p) {
  j = {{"a", p.a}, {"sigma", p.sigma}, {"beta", p.beta}, {"mu", p.mu},
       {"parameterization", p.kind == ParamKind::S0 ? "S0" : "S1"}};
}

inline void to_json(json& j, const StableFit& f) {
  j = {{"params", f.params}, {"loglik", f.loglik}, {"n", f.n}, {"converged", f.converged},
       {"constrained_a1", f.constrained_a1}};
}

inline void to_json(json& j, const LrtResult& r) {
  j = {{"statistic", r.statistic}, {"p_value", r.p_value}, {"reject_at_05", r.reject_at_05}};
}

inline void to_json(json& j, const TailFit& t) {
  j = {{"alpha_hat", t.alpha_hat}, {"gamma_hat", t.gamma_hat}, {"k", t.k},
       {"rho_hat", t.rho_hat},     {"corrected", t.corrected}, {"fell_back", t.fell_back}};
}

inline void to_json(json& j, const SpatialIndexes& m) { j = {{"m", m.m}, {"k", m.k}, {"alpha_used", m.alpha_used}}; }

inline void to_json(json& j, const Extremogram& e) {
  j = {{"lags", e.lags}, {"values", e.values}, {"baseline", e.baseline}, {"threshold_quantile", e.threshold_quantile}};
}

inline void to_json(json& j, const ReturnLevelEstimate& e) {
  j = {{"T_obs", e.T_obs},
       {"accepted", e.accepted},
       {"z", e.z},
       {"ci_low", e.ci_low},
       {"ci_high", e.ci_high},
       {"alpha_hat", e.alpha_hat},
       {"b", e.b},
       {"k", e.k},
       {"n_blocks", e.n_blocks},
       {"m_hat", e.m_hat},
       {"stable_fit", e.stable_fit},
       {"free_fit", e.free_fit},
       {"lrt", e.lrt}};
}

inline void to_json(json& j, const BlockSelection& s) {
  json p = json::array();
  for (double v : s.p_values) p.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  j = {{"candidates", s.candidates},
       {"p_values", p},
       {"accepted_mask", s.accepted_mask},
       {"evaluated", s.evaluated},
       {"chosen", s.chosen ? json(*s.chosen) : json(nullptr)},
       {"policy", to_string(s.policy)}};
}

inline void to_json(json& j, const QqTable& q) {
  j = {{"mode", to_string(q.mode)},
       {"coordinate", q.coordinate},
       {"levels", q.levels},
       {"empirical", q.empirical},
       {"theoretical", q.theoretical}};
}

inline void to_json(json& j, const GpdFit& f) {
  j = {{"u", f.u},
       {"sigma", f.sigma},
       {"xi", f.xi},
       {"n_exceed", f.n_exceed},
       {"n_clusters", f.n_clusters},
       {"zeta_u", f.zeta_u},
       {"loglik", f.loglik},
       {"converged", f.converged}};
}

inline void to_json(json& j, const GevFit& f) {
  j = {{"mu", f.mu},
       {"sigma", f.sigma},
       {"xi", f.xi},
       {"block_length", f.block_length},
       {"theta_hat", f.theta_hat},
       {"loglik", f.loglik},
       {"converged", f.converged}};
}

inline void to_json(json& j, const ReturnLevelCi& r) {
  j = {{"z", r.z}, {"se", r.se}, {"low", r.low}, {"high", r.high}, {"ci_method", r.method}};
}

inline void to_json(json& j, const ModelSpec& s) {
  j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case ModelKind::Burr:
      j["c"] = s.c;
      j["kappa"] = s.kappa;
      break;
    case ModelKind::Frechet: j["alpha"] = s.alpha; break;
    case ModelKind::Armax:
      j["alpha"] = s.alpha;
      j["lambda"] = s.lambda;
      break;
    case ModelKind::MArmax:
      j["alpha"] = s.alpha;
      j["lambda"] = s.lambda;
      j["tau"] = s.tau;
      j["d"] = s.d;
      break;
  }
}

inline void to_json(json& j, const McConfig& c) {
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.push_back(to_string(m));
  j = {{"model", c.model},
       {"n", c.n},
       {"n_reps", c.n_reps},
       {"T_years", c.T_years},
       {"obs_per_year", c.obs_per_year},
       {"methods", methods},
       {"block_lengths", c.block_lengths},
       {"k_exponent", c.k_exponent},
       {"seed", c.seed},
       {"R_bootstrap", c.R_bootstrap},
       {"univariate_too", c.univariate_too},
       {"threshold_quantile", c.threshold_quantile},
       {"bm_block_length", c.bm_block_length},
       {"ci_level", c.ci_level},
       {"rho_estimator", c.rho == RhoEstimator::LogMoments ? "log_moments" : "power_moments"},
       {"rho_rule", to_string(c.rho_rule)}};
}

/// Common envelope for return-level results of every method.
inline json return_level_envelope(const std::string& method, const std::vector<std::string>& coordinates) {
  return {{"schema_version", kSchemaVersion}, {"method", method}, {"coordinates", coordinates}, {"results", json::array()}};
}

}  // namespace stablesums
