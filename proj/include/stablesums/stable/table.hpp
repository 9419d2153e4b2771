#pragma once

// Tabulated log-density of the standardized, totally right-skewed (beta = 1)
// S0 law, used by the likelihood fits where the direct evaluation would be
// far too slow. One curve is built per node of the index grid
// a = 0.50, 0.51, ..., 2.00; a node is built on first use and cached for the
// life of the process. Between nodes, the curves are combined by four-point
// Lagrange interpolation in a, after aligning modes and left widths for
// a < 1 and in density rather than log-density on the right side near a = 2.
// Interpolation error is about 1e-6 in the bulk and below 1e-4 down to
// log f = -12.
//
// Each curve stores log f and its exact derivative on knots refined until
// the cubic Hermite interpolant reproduces midpoints to 1e-7 in log f.
// Outside the knots, the left side continues as a concave quadratic and the
// right side as the Pareto tail A - (1 + a) log(z - c), matched in value and
// slope.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "stablesums/parallel.hpp"
#include "stablesums/stable/density.hpp"

namespace stablesums {

namespace detail {

class LogDensityCurve {
 public:
  explicit LogDensityCurve(double a) : a_(a) {
    if (a_ == 2.0) return;  // closed form
    build();
  }

  double operator()(double z) const {
    if (a_ == 2.0) return -z * z / 4.0 - std::log(2.0 * std::sqrt(std::numbers::pi));
    if (z < z_lo_) {
      const double dz = z - z_lo_;
      return y_lo_ + d_lo_ * dz - k_lo_ * dz * dz;
    }
    if (z > z_hi_) return tail_a_ - (1.0 + a_) * std::log(z - tail_c_);
    return (*spline_)(z);
  }

  double index() const { return a_; }
  double mode() const { return mode_; }
  double left_width() const { return left_width_; }
  std::size_t knot_count() const { return knots_; }

 private:
  static constexpr double kFloorLog = -575.0;  // about log(1e-250)
  static constexpr double kRightEdge = 1e6;
  static constexpr double kTolerance = 1e-7;

  struct Point {
    double z, y, d;
  };

  Point eval(double z) const {
    const double f = standard_pdf(a_, 1.0, z);
    const double fp = standard_pdf_derivative(a_, 1.0, z);
    return {z, std::log(f), fp / f};
  }

  static double hermite_mid(const Point& p, const Point& q) {
    const double h = q.z - p.z;
    return 0.5 * (p.y + q.y) + h * (p.d - q.d) / 8.0;
  }

  // Leftmost z with log f >= kFloorLog; log f increases from the left edge
  // of the support up to the mode.
  double find_left_edge() const {
    const auto [support, unused] = std_support(a_, 1.0);
    (void)unused;
    double hi = -0.5;
    double lo;
    if (std::isfinite(support)) {
      lo = support;
    } else {
      lo = -1.0;
      for (;;) {
        const double f = standard_pdf(a_, 1.0, lo);
        if (f == 0.0 || std::log(f) < kFloorLog) break;
        hi = lo;
        lo *= 2.0;
      }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double f = standard_pdf(a_, 1.0, mid);
      if (f > 0.0 && std::log(f) >= kFloorLog) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  void refine(const Point& p, const Point& q, int depth, std::vector<Point>& out) const {
    const Point m = eval(0.5 * (p.z + q.z));
    const double err = std::abs(hermite_mid(p, q) - m.y);
    if (depth < 40 && err > kTolerance * std::max(1.0, std::abs(m.y))) {
      refine(p, m, depth + 1, out);
      refine(m, q, depth + 1, out);
    } else {
      out.push_back(m);
      out.push_back(q);
    }
  }

  void build() {
    const double left = find_left_edge();
    std::vector<double> grid;
    const double core_end = 20.0;
    for (double z = left; z < core_end; z += 0.25) grid.push_back(z);
    for (double z = core_end; z < kRightEdge; z *= 1.1) grid.push_back(z);
    grid.push_back(kRightEdge);

    std::vector<Point> base(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { base[i] = eval(grid[i]); });

    std::vector<std::vector<Point>> pieces(base.size() - 1);
    parallel_for(pieces.size(), [&](std::size_t i) { refine(base[i], base[i + 1], 0, pieces[i]); });

    std::vector<double> zs{base.front().z}, ys{base.front().y}, ds{base.front().d};
    for (const auto& piece : pieces) {
      for (const auto& p : piece) {
        zs.push_back(p.z);
        ys.push_back(p.y);
        ds.push_back(p.d);
      }
    }
    knots_ = zs.size();
    // Mode from the sign change of the derivative, left width from the
    // crossing of (peak - 4), both linear between knots.
    auto peak = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
    if (peak + 1 < zs.size() && ds[peak] > 0.0) ++peak;
    if (peak > 0 && ds[peak] <= 0.0 && ds[peak - 1] > 0.0) {
      const double t = ds[peak - 1] / (ds[peak - 1] - ds[peak]);
      mode_ = zs[peak - 1] + t * (zs[peak] - zs[peak - 1]);
    } else {
      mode_ = zs[peak];
    }
    const double level = (*std::max_element(ys.begin(), ys.end())) - 4.0;
    std::size_t k = peak;
    while (k > 0 && ys[k] > level) --k;
    if (ys[k] <= level && ys[k + 1] > level) {
      const double t = (level - ys[k]) / (ys[k + 1] - ys[k]);
      left_width_ = mode_ - (zs[k] + t * (zs[k + 1] - zs[k]));
    } else {
      left_width_ = mode_ - zs[k];
    }

    z_lo_ = zs.front();
    y_lo_ = ys.front();
    d_lo_ = ds.front();
    k_lo_ = std::max(0.0, -(ds[1] - ds[0]) / (zs[1] - zs[0])) / 2.0;

    z_hi_ = zs.back();
    const double y_hi = ys.back();
    const double d_hi = ds.back();
    tail_c_ = d_hi < 0.0 ? z_hi_ + (1.0 + a_) / d_hi : 0.0;
    if (!(tail_c_ < z_hi_)) tail_c_ = 0.0;
    tail_a_ = y_hi + (1.0 + a_) * std::log(z_hi_ - tail_c_);

    spline_ = std::make_unique<boost::math::interpolators::cubic_hermite<std::vector<double>>>(
        std::move(zs), std::move(ys), std::move(ds));
  }

  double a_;
  double mode_ = 0.0;
  double left_width_ = 1.0;
  std::size_t knots_ = 0;
  double z_lo_ = 0.0, y_lo_ = 0.0, d_lo_ = 0.0, k_lo_ = 0.0;
  double z_hi_ = 0.0, tail_a_ = 0.0, tail_c_ = 0.0;
  std::unique_ptr<boost::math::interpolators::cubic_hermite<std::vector<double>>> spline_;
};

}  // namespace detail

/// Process-wide cache of log-density curves for beta = 1.
class SkewedLogDensityTable {
 public:
  static constexpr double kMinIndex = 0.5;
  static constexpr double kMaxIndex = 2.0;
  static constexpr double kStep = 0.01;
  static constexpr std::size_t kNodes = 151;
  static constexpr double kAlignBelow = 1.0;
  static constexpr double kMixedTailAbove = 1.9;

  static SkewedLogDensityTable& instance() {
    static SkewedLogDensityTable table;
    return table;
  }

  static double node_index(std::size_t i) { return (50.0 + static_cast<double>(i)) / 100.0; }

  const detail::LogDensityCurve& node(std::size_t i) {
    std::call_once(flags_[i], [&] { curves_[i] = std::make_unique<detail::LogDensityCurve>(node_index(i)); });
    return *curves_[i];
  }

  /// Builds every node whose interpolation stencil touches [a_lo, a_hi].
  void warm(double a_lo, double a_hi) {
    auto [first, last] = stencil_range(a_lo, a_hi);
    parallel_for(last - first + 1, [&](std::size_t k) { node(first + k); });
  }

  /// log f(z) for the standardized beta = 1 S0 law of index a.
  double log_pdf(double a, double z) {
    double out;
    log_pdf(a, std::span<const double>(&z, 1), std::span<double>(&out, 1));
    return out;
  }

  /// Batched log_pdf; the stencil lookup is shared by all points.
  void log_pdf(double a, std::span<const double> z, std::span<double> out) {
    require(a >= kMinIndex && a <= kMaxIndex, "stable table: index outside [0.5, 2]");
    const double lower = detail::std_support(a, 1.0).first;
    const double pos = (a - kMinIndex) / kStep;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-9) {
      const auto& c = node(static_cast<std::size_t>(nearest));
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] <= lower ? -kInf : c(z[i]);
      return;
    }
    const auto i0 = static_cast<std::size_t>(std::clamp(std::floor(pos) - 1.0, 0.0, double(kNodes - 4)));
    std::array<const detail::LogDensityCurve*, 4> c{};
    std::array<double, 4> w{};
    // For a < 1 the left side narrows quickly towards the support bound
    // -tan(pi a/2), so points are matched by their offset from the mode,
    // scaled by the left width on that side, instead of by z.
    const bool align = a < kAlignBelow;
    // Near a = 2 the right side mixes a Gaussian core with a Pareto tail
    // whose weight vanishes at a = 2; that blend is smooth in f, not log f.
    const bool mixed_tail = node_index(i0 + 3) > kMixedTailAbove;
    double mode = 0.0;
    double width = 0.0;
    std::array<double, 4> node_mode{}, node_width{};
    for (std::size_t j = 0; j < 4; ++j) {
      c[j] = &node(i0 + j);
      double wj = 1.0;
      for (std::size_t m = 0; m < 4; ++m) {
        if (m != j) wj *= (pos - double(i0 + m)) / double(int(j) - int(m));
      }
      w[j] = wj;
      node_mode[j] = c[j]->mode();
      mode += wj * node_mode[j];
      node_width[j] = c[j]->left_width();
      width += wj * node_width[j];
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] <= lower) {
        out[i] = -kInf;
        continue;
      }
      std::array<double, 4> y{};
      for (std::size_t j = 0; j < 4; ++j) {
        double zj = z[i];
        if (align) {
          zj = z[i] < mode ? node_mode[j] + (z[i] - mode) * node_width[j] / width
                           : node_mode[j] + (z[i] - mode);
        }
        y[j] = (*c[j])(zj);
      }
      if (mixed_tail && z[i] > mode) {
        const double top = *std::max_element(y.begin(), y.end());
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += w[j] * std::exp(y[j] - top);
        out[i] = s > 0.0 ? top + std::log(s) : std::log(standard_pdf(a, 1.0, z[i]));
      } else {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += w[j] * y[j];
        out[i] = s;
      }
    }
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  SkewedLogDensityTable() = default;

  static std::pair<std::size_t, std::size_t> stencil_range(double a_lo, double a_hi) {
    auto lo_pos = (std::clamp(a_lo, kMinIndex, kMaxIndex) - kMinIndex) / kStep;
    auto hi_pos = (std::clamp(a_hi, kMinIndex, kMaxIndex) - kMinIndex) / kStep;
    auto first = static_cast<std::size_t>(std::clamp(std::floor(lo_pos) - 1.0, 0.0, double(kNodes - 1)));
    auto last = static_cast<std::size_t>(std::clamp(std::ceil(hi_pos) + 1.0, 0.0, double(kNodes - 1)));
    return {first, last};
  }

  std::array<std::once_flag, kNodes> flags_;
  std::array<std::unique_ptr<detail::LogDensityCurve>, kNodes> curves_;
};

}  // namespace stablesums
