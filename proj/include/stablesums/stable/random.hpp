#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "stablesums/random.hpp"
#include "stablesums/stable/params.hpp"

namespace stablesums {

/// One standardized S1 variate (sigma = 1, mu = 0) by the Chambers-Mallows-Stuck
/// transform of a uniform angle and a unit exponential.
inline double standard_stable_variate(double a, double beta, Rng& rng) {
  constexpr double pi = std::numbers::pi;
  const double v = pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (a == 1.0) {
    const double r = pi / 2.0 + beta * v;
    return (2.0 / pi) * (r * std::tan(v) - beta * std::log((pi / 2.0) * w * std::cos(v) / r));
  }
  const double t = beta * std::tan(pi * a / 2.0);
  const double b = std::atan(t) / a;
  const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
  const double av = a * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / a) * std::pow(std::cos(v - av) / w, (1.0 - a) / a);
}

/// n iid draws from the stable law, deterministic in seed.
inline std::vector<double> sample(const StableParams& params, std::size_t n, std::uint64_t seed) {
  validate(params);
  require(n >= 1, "stable sample: n must be at least 1");
  const StableParams p = to_s1(params);
  // S1 at a = 1 is not a location-scale family: scaling adds (2/pi) beta sigma log sigma.
  const double shift = p.a == 1.0 && p.sigma > 0.0
                           ? (2.0 / std::numbers::pi) * p.beta * p.sigma * std::log(p.sigma)
                           : 0.0;
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = p.sigma * standard_stable_variate(p.a, p.beta, rng) + shift + p.mu;
  return out;
}

/// Positive stable variate with Laplace transform exp(-t^tau), 0 < tau <= 1,
/// via Kanter's representation (A(U)/W)^((1 - tau)/tau).
inline double positive_stable_variate(double tau, Rng& rng) {
  require(tau > 0.0 && tau <= 1.0, "positive stable index must lie in (0, 1]");
  if (tau == 1.0) return 1.0;
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  const double zolotarev = std::pow(std::sin(tau * u), tau / (1.0 - tau)) *
                           std::sin((1.0 - tau) * u) / std::pow(std::sin(u), 1.0 / (1.0 - tau));
  return std::pow(zolotarev / w, (1.0 - tau) / tau);
}

}  // namespace stablesums
