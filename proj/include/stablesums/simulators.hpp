#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablesums/error.hpp"
#include "stablesums/multi_series.hpp"
#include "stablesums/random.hpp"
#include "stablesums/stable/random.hpp"

namespace stablesums {

enum class ModelKind { Burr, Frechet, Armax, MArmax };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Burr: return "burr";
    case ModelKind::Frechet: return "frechet";
    case ModelKind::Armax: return "armax";
    case ModelKind::MArmax: return "marmax";
  }
  return "unknown";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "burr") return ModelKind::Burr;
  if (s == "frechet") return ModelKind::Frechet;
  if (s == "armax") return ModelKind::Armax;
  if (s == "marmax") return ModelKind::MArmax;
  throw precondition_error("unknown model kind '" + s + "' (expected burr, frechet, armax or marmax)");
}

struct ModelSpec {
  ModelKind kind = ModelKind::Frechet;
  double c = 2.0;      ///< Burr shape
  double kappa = 2.0;  ///< Burr shape
  double alpha = 4.0;  ///< tail index of the Frechet-type models
  std::vector<double> lambda{0.7};
  double tau = 0.5;
  std::size_t d = 1;

  static ModelSpec burr(double c, double kappa) {
    ModelSpec s;
    s.kind = ModelKind::Burr;
    s.c = c;
    s.kappa = kappa;
    return s;
  }
  static ModelSpec frechet(double alpha) {
    ModelSpec s;
    s.kind = ModelKind::Frechet;
    s.alpha = alpha;
    return s;
  }
  static ModelSpec armax(double lambda, double alpha) {
    ModelSpec s;
    s.kind = ModelKind::Armax;
    s.lambda = {lambda};
    s.alpha = alpha;
    return s;
  }
  static ModelSpec marmax(std::vector<double> lambda, double alpha, double tau) {
    ModelSpec s;
    s.kind = ModelKind::MArmax;
    s.d = lambda.size();
    s.lambda = std::move(lambda);
    s.alpha = alpha;
    s.tau = tau;
    return s;
  }

  std::size_t dim() const { return kind == ModelKind::MArmax ? d : 1; }

  /// Index of regular variation. For Burr, 1 - F(x) = (1 + x^c)^-kappa ~ x^-(c kappa).
  double tail_index() const { return kind == ModelKind::Burr ? c * kappa : alpha; }
};

inline void validate(const ModelSpec& s) {
  switch (s.kind) {
    case ModelKind::Burr:
      require(s.c > 0.0 && s.kappa > 0.0, "Burr shapes c and kappa must be positive");
      break;
    case ModelKind::Frechet:
      require(s.alpha > 0.0, "Frechet tail index must be positive");
      break;
    case ModelKind::Armax:
      require(s.alpha > 0.0, "ARMAX tail index must be positive");
      require(s.lambda.size() == 1, "ARMAX takes exactly one lambda");
      require(s.lambda[0] >= 0.0 && s.lambda[0] < 1.0, "ARMAX lambda must lie in [0, 1)");
      break;
    case ModelKind::MArmax:
      require(s.alpha > 0.0, "mARMAX tail index must be positive");
      require(s.d >= 2 && s.lambda.size() == s.d, "mARMAX needs d >= 2 and one lambda per coordinate");
      for (double l : s.lambda) require(l >= 0.0 && l < 1.0, "mARMAX lambda must lie in [0, 1)");
      require(s.tau > 0.0 && s.tau <= 1.0, "mARMAX tau must lie in (0, 1]");
      break;
  }
}

inline double burr_inverse_cdf(double u, double c, double kappa) {
  return std::pow(std::pow(1.0 - u, -1.0 / kappa) - 1.0, 1.0 / c);
}

inline double frechet_inverse_cdf(double u, double alpha) { return std::pow(-std::log(u), -1.0 / alpha); }

/// Upper-tail form of the Burr quantile, accurate for tiny exceedance p.
inline double burr_upper_quantile(double p, double c, double kappa) {
  return std::pow(std::expm1(-std::log(p) / kappa), 1.0 / c);
}

/// Upper-tail form of the Frechet quantile: -log(1 - p) = -log1p(-p).
inline double frechet_upper_quantile(double p, double alpha) { return std::pow(-std::log1p(-p), -1.0 / alpha); }

namespace detail {

/// One Gumbel-copula vector with Frechet(alpha) marginals: with S positive
/// stable of Laplace transform exp(-t^tau), Z(j) = (E_j / S)^(-tau / alpha).
inline void gumbel_frechet_vector(double alpha, double tau, Rng& rng, std::vector<double>& z) {
  const double s = positive_stable_variate(tau, rng);
  for (auto& v : z) v = std::pow(rng.exponential() / s, -tau / alpha);
}

}  // namespace detail

/// Simulates n observations. ARMAX-type models start exactly at stationarity.
inline MultiSeries simulate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  require(n >= 1, "simulate: n must be at least 1");
  Rng rng(seed);
  const std::size_t d = spec.dim();
  std::vector<double> v(n * d);
  switch (spec.kind) {
    case ModelKind::Burr:
      for (auto& x : v) x = burr_inverse_cdf(rng.uniform(), spec.c, spec.kappa);
      break;
    case ModelKind::Frechet:
      for (auto& x : v) x = frechet_inverse_cdf(rng.uniform(), spec.alpha);
      break;
    case ModelKind::Armax: {
      const double lam = spec.lambda[0];
      const double scale = std::pow(1.0 - std::pow(lam, spec.alpha), 1.0 / spec.alpha);
      double x = frechet_inverse_cdf(rng.uniform(), spec.alpha);
      v[0] = x;
      for (std::size_t t = 1; t < n; ++t) {
        x = std::max(lam * x, scale * frechet_inverse_cdf(rng.uniform(), spec.alpha));
        v[t] = x;
      }
      break;
    }
    case ModelKind::MArmax: {
      std::vector<double> scale(d), z(d);
      for (std::size_t j = 0; j < d; ++j) {
        scale[j] = std::pow(1.0 - std::pow(spec.lambda[j], spec.alpha), 1.0 / spec.alpha);
      }
      // With a common lambda the stationary law of X_t is the innovation law
      // itself; otherwise it is still exact coordinate by coordinate.
      detail::gumbel_frechet_vector(spec.alpha, spec.tau, rng, z);
      for (std::size_t j = 0; j < d; ++j) v[j] = z[j];
      for (std::size_t t = 1; t < n; ++t) {
        detail::gumbel_frechet_vector(spec.alpha, spec.tau, rng, z);
        for (std::size_t j = 0; j < d; ++j) {
          v[t * d + j] = std::max(spec.lambda[j] * v[(t - 1) * d + j], scale[j] * z[j]);
        }
      }
      break;
    }
  }
  return MultiSeries(n, d, std::move(v));
}

struct OracleFacts {
  ModelSpec spec;
  std::optional<double> extremal_index;
  std::optional<std::vector<double>> m_theoretical;
  std::optional<double> pairwise_tail_dep;

  /// Marginal quantile at the given level.
  double true_quantile(double level) const { return true_upper_quantile(1.0 - level); }

  /// Marginal quantile exceeded with probability p.
  double true_upper_quantile(double p) const {
    require(p > 0.0 && p < 1.0, "oracle quantile: exceedance probability must lie in (0, 1)");
    if (spec.kind == ModelKind::Burr) return burr_upper_quantile(p, spec.c, spec.kappa);
    return frechet_upper_quantile(p, spec.alpha);
  }
};

inline OracleFacts oracle(const ModelSpec& spec) {
  validate(spec);
  OracleFacts o;
  o.spec = spec;
  switch (spec.kind) {
    case ModelKind::Burr:
    case ModelKind::Frechet:
      o.extremal_index = 1.0;
      o.m_theoretical = std::vector<double>{1.0};
      break;
    case ModelKind::Armax:
      o.extremal_index = 1.0 - std::pow(spec.lambda[0], spec.alpha);
      o.m_theoretical = std::vector<double>{1.0};
      break;
    case ModelKind::MArmax: {
      bool common = true;
      for (double l : spec.lambda) common = common && l == spec.lambda[0];
      if (common) o.extremal_index = 1.0 - std::pow(spec.lambda[0], spec.alpha);
      o.m_theoretical = std::vector<double>(spec.d, std::pow(static_cast<double>(spec.d), -spec.tau));
      o.pairwise_tail_dep = 2.0 - std::pow(2.0, spec.tau);
      break;
    }
  }
  return o;
}

}  // namespace stablesums
