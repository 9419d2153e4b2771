#pragma once

// Stable density, distribution function and quantile by numerical inversion
// of the characteristic function.
//
// All integrals are written for the standardized S0 law (scale 1, location
// 0). For u > 0,
//   e^{-iuz} phi0(u) = exp(-u^a) * exp(-i (u z + beta h(u))),
//   h(u) = tan(pi a/2) (u - u^a)       (a != 1),  (2/pi) u log u  (a == 1),
// and h is evaluated in a form that is continuous through a = 1. Then
//   f(z)  = (1/pi) int_0^inf e^{-u^a} cos(u z + beta h(u)) du
//   F(z)  = 1/2 + (1/pi) int_0^inf e^{-u^a} sin(u z + beta h(u)) / u du
//   f'(z) = -(1/pi) int_0^inf u e^{-u^a} sin(u z + beta h(u)) du
// The range is truncated where |phi0(u)| < 1e-16. The half line is cut into
// panels no wider than half a local oscillation period; each panel is
// integrated by adaptive Gauss-Kronrod, the first one by tanh-sinh because
// the integrands have an integrable singularity at u = 0 when a <= 1.
// Inversion gets expensive far from the mode when a is small (slow decay of
// |phi0|), so there the angular integral of Zolotarev is used instead.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "stablesums/error.hpp"
#include "stablesums/stable/params.hpp"

namespace stablesums {

namespace detail {

constexpr double kPi = std::numbers::pi;

struct PhaseFn {
  double a;
  double beta;
  double e;      // a - 1
  double cot_x;  // cot(pi e / 2); unused when e == 0

  PhaseFn(double a_, double beta_) : a(a_), beta(beta_), e(a_ - 1.0) {
    cot_x = e == 0.0 ? 0.0 : 1.0 / std::tan(kPi * e / 2.0);
  }

  double h(double u) const {
    const double lu = std::log(u);
    if (e == 0.0) return (2.0 / kPi) * u * lu;
    return cot_x * u * std::expm1(e * lu);
  }

  /// h(u) / u, needed by the distribution-function integrand.
  double h_over_u(double u) const {
    const double lu = std::log(u);
    if (e == 0.0) return (2.0 / kPi) * lu;
    return cot_x * std::expm1(e * lu);
  }

  double h_prime(double u) const {
    const double lu = std::log(u);
    if (e == 0.0) return (2.0 / kPi) * (lu + 1.0);
    return cot_x * (std::expm1(e * lu) + e * std::exp(e * lu));
  }
};

/// Upper truncation point: exp(-u^a) < 1e-16.
inline double truncation_point(double a) { return std::pow(36.8413614879047, 1.0 / a); }

/// Work limit for the panel loop, roughly |z| * U. Beyond it the asymptotic
/// Pareto tail is used instead of the inversion integral.
constexpr double kInversionWorkLimit = 5e6;

/// Half-width of the band around a = 1 where the a != 1 angular form is
/// not trusted.
constexpr double kAngularIndexGap = 0.002;

struct QuadratureOutcome {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
QuadratureOutcome integrate_half_line(const F& f, double z, const PhaseFn& phase, double upper) {
  using boost::math::quadrature::gauss_kronrod;
  using boost::math::quadrature::tanh_sinh;
  static thread_local tanh_sinh<double> ts;

  QuadratureOutcome out;
  const double first = std::min(0.1, kPi / (std::abs(z) + 1.0));
  {
    double err = 0.0;
    double l1 = 0.0;
    out.value += ts.integrate(f, 0.0, first, 1e-12, &err, &l1);
    out.error += err;
  }
  double u = first;
  while (u < upper) {
    const double omega = std::abs(z + phase.beta * phase.h_prime(u));
    double width = kPi / std::max(omega, 1e-300);
    const double env_scale = std::pow(u, 1.0 - phase.a) / phase.a;
    width = std::min(width, std::clamp(0.5 * env_scale, 0.05, 2.0));
    const double hi = std::min(u + width, upper);
    double err = 0.0;
    out.value += gauss_kronrod<double, 15>::integrate(f, u, hi, 3, 1e-11, &err);
    out.error += err;
    u = hi;
  }
  return out;
}

/// The absolute floor suits inversion, whose accuracy is absolute; the
/// angular form is checked with a relative tolerance only.
inline void check_quadrature(const QuadratureOutcome& q, const char* what, double floor = 1e-11) {
  if (!std::isfinite(q.value) || q.error > 1e-8 * std::abs(q.value) + floor) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "stable %s: integral did not reach tolerance (value %.6g, estimated error %.3g)",
                  what, q.value, q.error);
    throw convergence_error(buf);
  }
}

/// Support of the standardized S0 law: [lower, upper].
inline std::pair<double, double> std_support(double a, double beta) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a < 1.0 && beta == 1.0) return {-std::tan(kPi * a / 2.0), inf};
  if (a < 1.0 && beta == -1.0) return {-inf, std::tan(kPi * a / 2.0)};
  return {-inf, inf};
}

/// Tail constant c_a with P(X > x) ~ c_a (1 + beta) x^-a for unit scale.
inline double tail_constant(double a) {
  if (a == 1.0) return 1.0 / kPi;
  return boost::math::tgamma(a) * std::sin(kPi * a / 2.0) / kPi;
}

inline bool beyond_work_limit(double a, double z) {
  return a < 2.0 && std::abs(z) * truncation_point(a) > kInversionWorkLimit;
}

/// Leading-order Pareto tail, measured from the S1 location.
inline double asymptotic_pdf(double a, double beta, double z) {
  const double x = z - detail::s0_shift(a, 1.0, beta);
  const double side = x > 0 ? 1.0 + beta : 1.0 - beta;
  return a * tail_constant(a) * side * std::pow(std::abs(x), -a - 1.0);
}

inline double asymptotic_cdf(double a, double beta, double z) {
  const double x = z - detail::s0_shift(a, 1.0, beta);
  if (x > 0) return 1.0 - tail_constant(a) * (1.0 + beta) * std::pow(x, -a);
  return tail_constant(a) * (1.0 - beta) * std::pow(-x, -a);
}

inline double gaussian_pdf(double z) { return std::exp(-z * z / 4.0) / (2.0 * std::sqrt(kPi)); }


/// Zolotarev's integral representations over a finite angle, used away from
/// the mode where the Fourier integrand oscillates too fast to be cheap.
///
/// a != 1, z > zeta: with zeta = -beta tan(pi a/2),
/// theta0 = atan(beta tan(pi a/2)) / a and g(t) = (z - zeta)^{a/(a-1)} V(t)
/// on (-theta0, pi/2),
///   f(z) = a / (pi |a-1| (z - zeta)) int g e^{-g},
///   F(z) = c1 + sign(1-a)/pi int e^{-g},  c1 = 1/2 - theta0/pi (a < 1), 1 (a > 1).
/// a == 1, beta > 0: g(t) = exp(-pi z / (2 beta)) V(t) on (-pi/2, pi/2),
///   f(z) = 1 / (2 beta) int g e^{-g},  F(z) = 1/pi int e^{-g}.
/// Other cases follow by reflection. g is monotone in t, so the integrands
/// peak where g = 1; the range is split there.
struct AngularKernel {
  double lo = 0.0;
  double hi = 0.0;
  double a = 1.0;
  double beta = 1.0;
  double theta0 = 0.0;
  double cos_theta0 = 1.0;
  double sin_theta0 = 0.0;
  double cos_phi_hi = 1.0;  // phi_hi = a theta0 + (a-1) pi/2
  double sin_phi_hi = 0.0;
  double cos_a_span = 1.0;  // a (hi - lo)
  double sin_a_span = 0.0;
  double c0 = 0.0;  // additive constant of log g

  static AngularKernel general(double a, double beta, double xz) {
    AngularKernel k;
    k.a = a;
    k.beta = beta;
    // At |beta| = 1 some endpoint factors vanish exactly: cos(theta0) when
    // a < 1, and cos(phi_hi), sin(a span) when a > 1, beta = -1. They are set
    // by hand; atan(tan(.)) would be off by an ulp and wreck the integrand.
    const bool edge_lo = a < 1.0 && std::abs(beta) == 1.0;
    const bool edge_hi = a > 1.0 && beta == -1.0;
    if (edge_lo) {
      k.theta0 = beta * kPi / 2.0;
    } else if (edge_hi) {
      k.theta0 = (kPi - kPi * a / 2.0) / a;
    } else {
      k.theta0 = std::atan(beta * std::tan(kPi * a / 2.0)) / a;
    }
    k.lo = -k.theta0;
    k.hi = kPi / 2.0;
    k.cos_theta0 = edge_lo ? 0.0 : std::cos(k.theta0);
    k.sin_theta0 = edge_lo ? beta : std::sin(k.theta0);
    const double phi = a * k.theta0 + (a - 1.0) * kPi / 2.0;
    k.cos_phi_hi = edge_hi ? 0.0 : std::cos(phi);
    k.sin_phi_hi = edge_hi ? 1.0 : std::sin(phi);
    k.cos_a_span = edge_hi ? -1.0 : std::cos(a * (k.hi - k.lo));
    k.sin_a_span = edge_hi ? 0.0 : std::sin(a * (k.hi - k.lo));
    k.c0 = a / (a - 1.0) * std::log(xz) + std::log(std::cos(a * k.theta0)) / (a - 1.0);
    return k;
  }

  static AngularKernel unit(double beta, double z) {
    AngularKernel k;
    k.a = 1.0;
    k.beta = beta;
    k.lo = -kPi / 2.0;
    k.hi = kPi / 2.0;
    k.c0 = -kPi * z / (2.0 * beta) + std::log(2.0 / kPi);
    return k;
  }

  /// log g at the angle lying dlo above lo and dhi below hi. Both distances
  /// are passed so that terms vanishing at an endpoint keep full precision.
  double log_g(double dlo, double dhi) const {
    const bool left = dlo <= dhi;
    // cos t, accurate near -pi/2 (only reachable as lo) and near pi/2 = hi.
    const double cos_t = left ? std::sin((kPi / 2.0 + lo) + dlo) : std::sin(dhi);
    if (a == 1.0) {
      const double r = (kPi / 2.0) * (1.0 - beta) + beta * dlo;  // pi/2 + beta t
      const double sin_t = left ? -std::cos((kPi / 2.0 + lo) + dlo) : std::cos(dhi);
      return c0 + std::log(r) - std::log(cos_t) + r * (sin_t / cos_t) / beta;
    }
    const double p = a / (a - 1.0);
    // cos(a theta0 + (a-1) t), written as cos(theta0 + (a-1) dlo) or
    // cos(phi_hi - (a-1) dhi) and expanded so vanishing factors stay exact.
    const double c = left ? cos_theta0 * std::cos((a - 1.0) * dlo) - sin_theta0 * std::sin((a - 1.0) * dlo)
                          : cos_phi_hi * std::cos((a - 1.0) * dhi) + sin_phi_hi * std::sin((a - 1.0) * dhi);
    const double sin_a_dlo =
        left ? std::sin(a * dlo) : sin_a_span * std::cos(a * dhi) - cos_a_span * std::sin(a * dhi);
    return c0 + p * (std::log(cos_t) - std::log(sin_a_dlo)) + std::log(c) - std::log(cos_t);
  }

  /// int h(log g(t)) dt over (lo, hi). The integrands peak where g = 1, or
  /// at the end where g is closest to 1, and are negligible once g exceeds
  /// its smallest value by 60; the range is cut there and split at the peak.
  template <class H>
  QuadratureOutcome integrate(const H& h) const {
    using boost::math::quadrature::tanh_sinh;
    using boost::math::tools::eps_tolerance;
    using boost::math::tools::toms748_solve;
    static thread_local tanh_sinh<double> ts;
    QuadratureOutcome out;
    const double span = hi - lo;
    if (!(span > 0.0)) return out;

    // Log g as a function of the distance from lo (left) or from hi (right).
    auto from_lo = [&](double d) { return log_g(d, span - d); };
    auto from_hi = [&](double d) { return log_g(span - d, d); };
    auto root = [&](auto fn, double x0, double x1, double target) {
      double f0 = fn(x0) - target;
      double f1 = fn(x1) - target;
      if (!(f0 * f1 < 0.0)) return std::abs(f0) < std::abs(f1) ? x0 : x1;
      std::uintmax_t it = 200;
      auto r = toms748_solve([&](double d) { return fn(d) - target; }, x0, x1, f0, f1,
                             eps_tolerance<double>(40), it);
      return 0.5 * (r.first + r.second);
    };

    const double probe = 1e-13 * span;
    const double fa = from_lo(probe);
    const double fb = from_hi(probe);
    double peak;        // distance of the peak from lo
    double log_g_peak;  // log g at the peak, at most 0 when the curve crosses 1
    if (std::isnan(fa) || std::isnan(fb)) {
      peak = 0.5 * span;
      log_g_peak = 0.0;
    } else if (fa * fb < 0.0) {
      peak = root(from_lo, probe, span - probe, 0.0);
      log_g_peak = 0.0;
    } else if (fa > 0.0) {
      peak = fa < fb ? 0.0 : span;
      log_g_peak = std::min(fa, fb);
    } else {
      peak = 0.5 * span;
      log_g_peak = 0.0;
    }
    const double log_cut = std::log(std::exp(std::max(log_g_peak, 0.0)) + 60.0);

    // Pieces as (distance of start from lo, distance of end from hi).
    std::array<std::pair<double, double>, 2> pieces{};
    std::size_t count = 0;
    if (peak > 0.0) {
      double start = 0.0;
      if (fa > log_cut) start = root(from_lo, probe, std::min(peak, span - probe), log_cut);
      pieces[count++] = {start, span - peak};
    }
    if (peak < span) {
      double end = 0.0;
      if (fb > log_cut) end = root(from_hi, probe, std::min(span - peak, span - probe), log_cut);
      pieces[count++] = {peak, end};
    }

    for (std::size_t i = 0; i < count; ++i) {
      const auto [d0, e1] = pieces[i];
      const double r = 0.5 * (span - d0 - e1);
      if (!(r > 0.0)) continue;
      // On the reference interval [-1, 1] boost supplies the signed distance
      // xc to the nearer endpoint alongside s.
      auto f = [&](double s, double xc) {
        const double left = r * (s < 0.0 ? -xc : 1.0 + s);
        const double right = r * (s > 0.0 ? xc : 1.0 - s);
        const double lg = log_g(d0 + left, e1 + right);
        return std::isnan(lg) ? 0.0 : h(lg);
      };
      double err = 0.0;
      double l1 = 0.0;
      out.value += r * ts.integrate(f, 1e-13, &err, &l1);
      out.error += r * err;
    }
    return out;
  }
};

inline double g_exp_neg_g(double lg) { return lg > 700.0 ? 0.0 : std::exp(lg - std::exp(lg)); }

inline double angular_zeta(double a, double beta) { return -beta * std::tan(kPi * a / 2.0); }

inline double angular_pdf(double a, double beta, double z) {
  if (a == 1.0) {
    if (beta < 0.0) return angular_pdf(a, -beta, -z);
    auto q = AngularKernel::unit(beta, z).integrate(g_exp_neg_g);
    check_quadrature(q, "pdf", 0.0);
    return std::max(0.0, q.value / (2.0 * beta));
  }
  const double zeta = angular_zeta(a, beta);
  if (z < zeta) return angular_pdf(a, -beta, -z);
  const double xz = z - zeta;
  auto q = AngularKernel::general(a, beta, xz).integrate(g_exp_neg_g);
  check_quadrature(q, "pdf", 0.0);
  return std::max(0.0, a / (kPi * std::abs(a - 1.0) * xz) * q.value);
}

inline double angular_pdf_derivative(double a, double beta, double z) {
  if (a == 1.0) {
    if (beta < 0.0) return -angular_pdf_derivative(a, -beta, -z);
    auto q = AngularKernel::unit(beta, z).integrate(
        [](double lg) { return lg > 700.0 ? 0.0 : g_exp_neg_g(lg) * (1.0 - std::exp(lg)); });
    return -kPi / (4.0 * beta * beta) * q.value;
  }
  const double zeta = angular_zeta(a, beta);
  if (z < zeta) return -angular_pdf_derivative(a, -beta, -z);
  const double xz = z - zeta;
  const double p = a / (a - 1.0);
  auto q = AngularKernel::general(a, beta, xz).integrate([p](double lg) {
    return lg > 700.0 ? 0.0 : g_exp_neg_g(lg) * (p * (1.0 - std::exp(lg)) - 1.0);
  });
  return a / (kPi * std::abs(a - 1.0) * xz * xz) * q.value;
}

inline double angular_cdf(double a, double beta, double z) {
  auto e_neg_g = [](double lg) { return std::exp(-std::exp(lg)); };
  if (a == 1.0) {
    if (beta < 0.0) return 1.0 - angular_cdf(a, -beta, -z);
    auto q = AngularKernel::unit(beta, z).integrate(e_neg_g);
    check_quadrature(q, "cdf", 0.0);
    return std::clamp(q.value / kPi, 0.0, 1.0);
  }
  const double zeta = angular_zeta(a, beta);
  if (z < zeta) return 1.0 - angular_cdf(a, -beta, -z);
  const auto k = AngularKernel::general(a, beta, z - zeta);
  auto q = k.integrate(e_neg_g);
  check_quadrature(q, "cdf", 0.0);
  const double c1 = a < 1.0 ? 0.5 - k.theta0 / kPi : 1.0;
  const double sgn = a < 1.0 ? 1.0 : -1.0;
  return std::clamp(c1 + sgn * q.value / kPi, 0.0, 1.0);
}

/// Where each representation is usable. The angular form loses accuracy
/// close to zeta (when zeta is interior to the support), as a -> 1 with
/// a != 1, and as beta -> 0 at a = 1.
inline bool angular_ok(double a, double beta, double z) {
  if (a == 1.0) return std::abs(beta) >= 0.05;
  if (std::abs(a - 1.0) < kAngularIndexGap) return false;
  const bool edge = a < 1.0 && std::abs(beta) == 1.0;
  return edge || std::abs(z - angular_zeta(a, beta)) >= 0.05;
}

/// Inversion is preferred while its panel count stays small.
constexpr double kInversionCheapWork = 600.0;

inline bool use_inversion(double a, double beta, double z) {
  if (!angular_ok(a, beta, z)) return true;
  return (std::abs(z) + 1.0) * truncation_point(a) <= kInversionCheapWork;
}

/// Inversion is only accurate in absolute terms; tiny results are redone
/// with the angular form when it applies, for relative accuracy in the tails.
constexpr double kTinyProbability = 1e-9;

inline double inversion_pdf(double a, double beta, double z) {
  if (beyond_work_limit(a, z)) return asymptotic_pdf(a, beta, z);
  const PhaseFn phase(a, beta);
  auto f = [&](double u) {
    if (u <= 0.0) return 1.0;
    return std::exp(-std::pow(u, a)) * std::cos(u * z + beta * phase.h(u));
  };
  auto q = integrate_half_line(f, z, phase, truncation_point(a));
  check_quadrature(q, "pdf");
  return std::max(0.0, q.value / kPi);
}

inline double inversion_pdf_derivative(double a, double beta, double z) {
  if (beyond_work_limit(a, z)) {
    const double x = z - s0_shift(a, 1.0, beta);
    return -(a + 1.0) / x * asymptotic_pdf(a, beta, z);
  }
  const PhaseFn phase(a, beta);
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    return -u * std::exp(-std::pow(u, a)) * std::sin(u * z + beta * phase.h(u));
  };
  auto q = integrate_half_line(f, z, phase, 1.2 * truncation_point(a));
  if (!std::isfinite(q.value)) throw convergence_error("stable pdf derivative: non-finite value");
  return q.value / kPi;
}

inline double inversion_cdf(double a, double beta, double z) {
  if (beyond_work_limit(a, z)) return std::clamp(asymptotic_cdf(a, beta, z), 0.0, 1.0);
  const PhaseFn phase(a, beta);
  auto f = [&](double u) {
    if (u <= 0.0) return z + beta * phase.h_over_u(1e-300);
    const double arg = u * z + beta * phase.h(u);
    // sin(arg)/u with arg = u (z + beta h(u)/u); keeps precision for tiny u.
    const double ratio = z + beta * phase.h_over_u(u);
    const double s = std::abs(arg) < 1e-8 ? ratio * (1.0 - arg * arg / 6.0) : std::sin(arg) / u;
    return std::exp(-std::pow(u, a)) * s;
  };
  auto q = integrate_half_line(f, z, phase, truncation_point(a));
  check_quadrature(q, "cdf");
  return std::clamp(0.5 + q.value / kPi, 0.0, 1.0);
}

}  // namespace detail

/// Density of the standardized S0 law with index a and skewness beta.
inline double standard_pdf(double a, double beta, double z) {
  if (a == 2.0) return detail::gaussian_pdf(z);
  auto [lo, hi] = detail::std_support(a, beta);
  if (z <= lo || z >= hi) return 0.0;
  if (a == 1.0 && beta == 0.0) return 1.0 / (detail::kPi * (1.0 + z * z));
  if (detail::use_inversion(a, beta, z)) {
    const bool fallback = detail::angular_ok(a, beta, z);
    try {
      const double f = detail::inversion_pdf(a, beta, z);
      if (f >= detail::kTinyProbability || !fallback) return f;
    } catch (const convergence_error&) {
      if (!fallback) throw;
    }
  }
  return detail::angular_pdf(a, beta, z);
}

/// Derivative of standard_pdf with respect to z.
inline double standard_pdf_derivative(double a, double beta, double z) {
  if (a == 2.0) return -z / 2.0 * detail::gaussian_pdf(z);
  auto [lo, hi] = detail::std_support(a, beta);
  if (z <= lo || z >= hi) return 0.0;
  if (a == 1.0 && beta == 0.0) return -2.0 * z / (detail::kPi * (1.0 + z * z) * (1.0 + z * z));
  if (detail::use_inversion(a, beta, z)) {
    const double d = detail::inversion_pdf_derivative(a, beta, z);
    if (std::abs(d) >= detail::kTinyProbability || !detail::angular_ok(a, beta, z)) return d;
  }
  return detail::angular_pdf_derivative(a, beta, z);
}

inline double standard_cdf(double a, double beta, double z) {
  if (a == 2.0) return 0.5 * std::erfc(-z / 2.0);
  auto [lo, hi] = detail::std_support(a, beta);
  if (z <= lo) return 0.0;
  if (z >= hi) return 1.0;
  if (a == 1.0 && beta == 0.0) return 0.5 + std::atan(z) / detail::kPi;
  if (detail::use_inversion(a, beta, z)) {
    const bool fallback = detail::angular_ok(a, beta, z);
    try {
      const double c = detail::inversion_cdf(a, beta, z);
      const bool tiny = c < detail::kTinyProbability || c > 1.0 - detail::kTinyProbability;
      if (!tiny || !fallback) return c;
    } catch (const convergence_error&) {
      if (!fallback) throw;
    }
  }
  return detail::angular_cdf(a, beta, z);
}

inline double standard_quantile(double a, double beta, double level) {
  require(level > 0.0 && level < 1.0, "stable quantile: level must lie in (0, 1)");
  if (a == 2.0) return -2.0 * boost::math::erfc_inv(2.0 * level);
  auto [lo_support, hi_support] = detail::std_support(a, beta);
  auto g = [&](double z) { return standard_cdf(a, beta, z) - level; };

  double lo = 0.0;
  double hi = 0.0;
  double g0 = g(0.0);
  double glo, ghi;
  if (g0 < 0.0) {
    lo = 0.0;
    glo = g0;
    double step = 1.0;
    hi = step;
    while ((ghi = g(hi)) < 0.0) {
      lo = hi;
      glo = ghi;
      step *= 2.0;
      hi = std::min(lo + step, hi_support);
      if (!std::isfinite(hi) || step > 1e300) throw convergence_error("stable quantile: bracket failed");
    }
  } else {
    hi = 0.0;
    ghi = g0;
    double step = 1.0;
    lo = -step;
    if (std::isfinite(lo_support)) lo = std::max(lo, lo_support);
    while ((glo = g(lo)) > 0.0) {
      hi = lo;
      ghi = glo;
      step *= 2.0;
      lo = lo - step;
      if (std::isfinite(lo_support)) lo = std::max(lo, lo_support);
      if (step > 1e300) throw convergence_error("stable quantile: bracket failed");
    }
  }
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                             boost::math::tools::eps_tolerance<double>(48), max_iter);
  if (max_iter >= 200) throw convergence_error("stable quantile: root finder did not converge");
  return 0.5 * (r.first + r.second);
}

namespace detail {

inline double standardize(const StableParams& p0, double x) { return (x - p0.mu) / p0.sigma; }

}  // namespace detail

inline double pdf(const StableParams& params, double x) {
  validate(params);
  require(params.sigma > 0.0, "stable pdf: scale must be positive");
  const StableParams p0 = to_s0(params);
  return standard_pdf(p0.a, p0.beta, detail::standardize(p0, x)) / p0.sigma;
}

inline double cdf(const StableParams& params, double x) {
  validate(params);
  require(params.sigma > 0.0, "stable cdf: scale must be positive");
  const StableParams p0 = to_s0(params);
  return standard_cdf(p0.a, p0.beta, detail::standardize(p0, x));
}

inline double quantile(const StableParams& params, double level) {
  validate(params);
  require(params.sigma > 0.0, "stable quantile: scale must be positive");
  const StableParams p0 = to_s0(params);
  return p0.mu + p0.sigma * standard_quantile(p0.a, p0.beta, level);
}

}  // namespace stablesums
