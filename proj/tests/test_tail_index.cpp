#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stablesums/simulators.hpp"
#include "stablesums/stats.hpp"
#include "stablesums/tail_index.hpp"

namespace ss = stablesums;

namespace {

std::vector<double> pareto_grid(std::size_t n, double alpha) {
  std::vector<double> x(n);
  for (std::size_t i = 1; i <= n; ++i) x[i - 1] = std::pow(static_cast<double>(n) / static_cast<double>(i), 1.0 / alpha);
  return x;
}

std::vector<double> column(const ss::ModelSpec& m, std::size_t n, std::uint64_t seed) {
  return ss::simulate(m, n, seed).column(0);
}

std::size_t k_of(std::size_t n, double e) { return static_cast<std::size_t>(std::pow(static_cast<double>(n), e)); }

}  // namespace

TEST(Hill, HandComputation) {
  const std::vector<double> x{8.0, 4.0, 2.0, 1.0};
  const auto h = ss::hill(x, 2);
  const double gamma = (std::log(4.0) + std::log(2.0)) / 2.0;
  EXPECT_NEAR(h.gamma_hat, gamma, 1e-12);
  EXPECT_NEAR(h.alpha_hat, 1.0 / gamma, 1e-12);
  EXPECT_FALSE(h.corrected);
}

TEST(Hill, ParetoGrid) {
  const auto h = ss::hill(pareto_grid(10000, 4.0), 100);
  EXPECT_NEAR(h.alpha_hat, 4.0, 0.2);
  EXPECT_NEAR(h.alpha_hat * h.gamma_hat, 1.0, 1e-12);
}

TEST(Hill, EqualValuesDegenerate) {
  const std::vector<double> x(50, 2.0);
  EXPECT_THROW(ss::hill(x, 10), ss::degenerate_data_error);
}

TEST(Hill, KOutOfRange) {
  const auto x = pareto_grid(100, 2.0);
  EXPECT_THROW(ss::hill(x, 0), ss::precondition_error);
  EXPECT_THROW(ss::hill(x, 100), ss::precondition_error);
}

TEST(Rho, NonPositiveOnFrechet) {
  const auto x = column(ss::ModelSpec::frechet(4.0), 4000, 1);
  EXPECT_LE(ss::rho_second_order(x, k_of(4000, 0.9)), 0.0);
  EXPECT_LE(ss::rho_second_order(x, k_of(4000, 0.9), ss::RhoEstimator::LogMoments, ss::RhoRule::LargeK), 0.0);
}

TEST(Rho, BurrNegativeAndFinite) {
  int good = 0;
  for (int s = 0; s < 200; ++s) {
    const auto x = column(ss::ModelSpec::burr(2.0, 2.0), 4000, 100 + s);
    try {
      const double r = ss::rho_second_order(x, k_of(4000, 0.9));
      good += (std::isfinite(r) && r < 0.0) ? 1 : 0;
    } catch (const ss::degenerate_data_error&) {
    }
  }
  EXPECT_GE(good, 190);
}

TEST(Rho, ConstantTailDegenerate) {
  std::vector<double> x(500, 1.0);
  EXPECT_THROW(ss::rho_second_order(x, 100), ss::degenerate_data_error);
}

TEST(Rho, RuleNames) {
  EXPECT_EQ(ss::rho_rule_from_string(ss::to_string(ss::RhoRule::LargeK)), ss::RhoRule::LargeK);
  EXPECT_EQ(ss::rho_rule_from_string(ss::to_string(ss::RhoRule::MedianToK)), ss::RhoRule::MedianToK);
  EXPECT_THROW(ss::rho_rule_from_string("other"), ss::precondition_error);
}

TEST(UnbiasedHill, FrechetHitRate) {
  int hits = 0;
  for (int s = 0; s < 200; ++s) {
    const auto x = column(ss::ModelSpec::frechet(4.0), 4000, 500 + s);
    const auto t = ss::unbiased_hill(x, k_of(4000, 0.9));
    EXPECT_NEAR(t.alpha_hat * t.gamma_hat, 1.0, 1e-12);
    EXPECT_LE(t.rho_hat, 0.0);
    hits += std::abs(t.alpha_hat - 4.0) <= 0.4 ? 1 : 0;
  }
  EXPECT_GE(hits, 180);
}

TEST(UnbiasedHill, ReducesBurrBias) {
  std::vector<double> plain, corrected;
  const std::size_t k = k_of(4000, 0.7);
  for (int s = 0; s < 200; ++s) {
    const auto x = column(ss::ModelSpec::burr(2.0, 2.0), 4000, 900 + s);
    plain.push_back(ss::hill(x, k).alpha_hat);
    corrected.push_back(ss::unbiased_hill(x, k).alpha_hat);
  }
  EXPECT_LT(std::abs(ss::median(corrected) - 4.0), std::abs(ss::median(plain) - 4.0));
}

TEST(UnbiasedHill, ParetoGridNeedsNoCorrection) {
  const auto x = pareto_grid(10000, 4.0);
  const double plain = ss::hill(x, 500).alpha_hat;
  const double corrected = ss::unbiased_hill(x, 500).alpha_hat;
  EXPECT_NEAR(corrected, plain, 0.01 * plain);
}

TEST(SpatialIndexes, Univariate) {
  const auto x = ss::simulate(ss::ModelSpec::frechet(4.0), 1000, 2);
  const auto m = ss::spatial_indexes(x, 4.0);
  ASSERT_EQ(m.m.size(), 1u);
  EXPECT_EQ(m.m[0], 1.0);
}

TEST(SpatialIndexes, DuplicatedCoordinates) {
  const auto c = column(ss::ModelSpec::frechet(4.0), 2000, 3);
  std::vector<double> v;
  for (double e : c) {
    v.push_back(e);
    v.push_back(e);
  }
  const ss::MultiSeries x(c.size(), 2, v);
  const auto m = ss::spatial_indexes(x, 4.0);
  EXPECT_DOUBLE_EQ(m.m[0], 1.0);
  EXPECT_DOUBLE_EQ(m.m[1], 1.0);
}

TEST(SpatialIndexes, MarmaxOracle) {
  const auto x = ss::simulate(ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5), 100000, 4);
  const auto m = ss::spatial_indexes(x, 4.0);
  for (double v : m.m) {
    EXPECT_NEAR(v, std::pow(3.0, -0.5), 0.05);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Extremogram, LagZeroAndRange) {
  const auto x = column(ss::ModelSpec::armax(0.7, 4.0), 5000, 5);
  const auto e = ss::extremogram(x, 15);
  EXPECT_EQ(e.values.at(0), 1.0);
  for (double v : e.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Extremogram, IidNearBaseline) {
  const auto x = column(ss::ModelSpec::frechet(4.0), 10000, 6);
  const auto e = ss::extremogram(x, 10);
  EXPECT_NEAR(e.baseline, 0.05, 1e-9);
  for (std::size_t h = 1; h <= 10; ++h) EXPECT_NEAR(e.values[h], 0.05, 0.02) << "lag " << h;
}

TEST(Extremogram, ArmaxLagOne) {
  const auto x = column(ss::ModelSpec::armax(0.7, 4.0), 100000, 7);
  const auto e = ss::extremogram(x, 3, 0.99);
  // Finite-threshold value at the 99% level, computed from the exact
  // stationary law: pr(X_1 > u | X_0 > u) with X_1 = max(l X_0, c Z).
  const double l = 0.7, a = 4.0;
  const double u = std::pow(-std::log(0.99), -1.0 / a);
  const double c = std::pow(1.0 - std::pow(l, a), 1.0 / a);
  // pr(X_0 > u/l) + pr(u < X_0 <= u/l) pr(cZ > u), all unit-Frechet^(1/a) tails.
  const auto F = [&](double x) { return std::exp(-std::pow(x, -a)); };
  const double joint = (1.0 - F(u / l)) + (F(u / l) - F(u)) * (1.0 - std::exp(-std::pow(u / c, -a)));
  const double finite = joint / (1.0 - F(u));
  EXPECT_NEAR(finite, std::pow(l, a), 0.01);
  EXPECT_NEAR(e.values[1], std::pow(l, a), 0.02);
}
