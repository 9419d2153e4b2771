#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "stablesums/error.hpp"

namespace stablesums {

/// S1 is the classical parameterization whose characteristic function is
///   exp{-s^a |u|^a (1 - i b sign(u) tan(pi a/2)) + i m u}           a != 1
///   exp{-s |u| (1 + i b (2/pi) sign(u) log|u|) + i m u}             a == 1
/// S0 shifts the location so the law is jointly continuous in all four
/// parameters; fitting works in S0 and reports S1.
enum class ParamKind { S1, S0 };

inline std::string to_string(ParamKind k) { return k == ParamKind::S1 ? "S1" : "S0"; }

struct StableParams {
  double a = 1.0;      ///< stable index in (0, 2]
  double sigma = 1.0;  ///< scale >= 0
  double beta = 0.0;   ///< skewness in [-1, 1]
  double mu = 0.0;     ///< location
  ParamKind kind = ParamKind::S1;

  bool operator==(const StableParams&) const = default;
};

inline void validate(const StableParams& p) {
  require(p.a > 0.0 && p.a <= 2.0, "stable index a must lie in (0, 2]");
  require(p.sigma >= 0.0, "stable scale must be nonnegative");
  require(p.beta >= -1.0 && p.beta <= 1.0, "stable skewness must lie in [-1, 1]");
  require(std::isfinite(p.mu), "stable location must be finite");
}

namespace detail {

/// Location offset mu0 - mu1 between the S0 and S1 parameterizations.
inline double s0_shift(double a, double sigma, double beta) {
  if (a == 1.0) {
    return sigma > 0.0 ? beta * (2.0 / std::numbers::pi) * sigma * std::log(sigma) : 0.0;
  }
  return beta * sigma * std::tan(std::numbers::pi * a / 2.0);
}

}  // namespace detail

inline StableParams to_s0(const StableParams& p) {
  if (p.kind == ParamKind::S0) return p;
  StableParams q = p;
  q.mu = p.mu + detail::s0_shift(p.a, p.sigma, p.beta);
  q.kind = ParamKind::S0;
  return q;
}

inline StableParams to_s1(const StableParams& p) {
  if (p.kind == ParamKind::S1) return p;
  StableParams q = p;
  q.mu = p.mu - detail::s0_shift(p.a, p.sigma, p.beta);
  q.kind = ParamKind::S1;
  return q;
}

/// E[exp(i u X)] in the S1 parameterization (S0 input is converted).
inline std::complex<double> char_fn(const StableParams& params, double u) {
  validate(params);
  if (u == 0.0) return {1.0, 0.0};
  const StableParams p = to_s1(params);
  const double au = std::abs(u);
  const double sgn = u > 0.0 ? 1.0 : -1.0;
  std::complex<double> log_phi;
  if (p.a == 1.0) {
    const double s = p.sigma * au;
    log_phi = {-s, -p.sigma * au * p.beta * sgn * (2.0 / std::numbers::pi) * std::log(au) + p.mu * u};
  } else {
    const double s = std::pow(p.sigma * au, p.a);
    log_phi = {-s, s * p.beta * sgn * std::tan(std::numbers::pi * p.a / 2.0) + p.mu * u};
  }
  return std::exp(log_phi);
}

}  // namespace stablesums
