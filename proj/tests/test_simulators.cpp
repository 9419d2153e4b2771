#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stablesums/simulators.hpp"
#include "stablesums/stats.hpp"

namespace ss = stablesums;

namespace {

double ks_frechet(std::vector<double> x, double alpha) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::exp(-std::pow(x[i], -alpha));
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

double chi_hat(const std::vector<double>& x, const std::vector<double>& y, double level) {
  const double ux = ss::order_quantile(x, level), uy = ss::order_quantile(y, level);
  double nx = 0, both = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] > ux) {
      ++nx;
      both += y[t] > uy ? 1 : 0;
    }
  }
  return both / nx;
}

}  // namespace

TEST(Burr, InverseCdf) {
  EXPECT_NEAR(ss::burr_inverse_cdf(0.5, 2.0, 2.0), std::sqrt(std::sqrt(2.0) - 1.0), 1e-12);
  EXPECT_NEAR(ss::burr_inverse_cdf(0.5, 2.0, 2.0), 0.6436, 1e-4);
  // Survival (1 + x^c)^-kappa evaluated at the quantile.
  const double x = ss::burr_inverse_cdf(0.9, 1.5, 3.0);
  EXPECT_NEAR(std::pow(1.0 + std::pow(x, 1.5), -3.0), 0.1, 1e-12);
}

TEST(Burr, UpperQuantileAgrees) {
  EXPECT_NEAR(ss::burr_upper_quantile(0.3, 2.0, 2.0), ss::burr_inverse_cdf(0.7, 2.0, 2.0), 1e-12);
}

TEST(Validate, RejectsBadSpecs) {
  EXPECT_THROW(ss::validate(ss::ModelSpec::marmax({0.7}, 4.0, 0.5)), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::ModelSpec::marmax({0.7, 0.7}, 4.0, 0.0)), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::ModelSpec::marmax({0.7, 0.7}, 4.0, 1.2)), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::ModelSpec::armax(1.0, 4.0)), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::ModelSpec::burr(-1.0, 2.0)), ss::precondition_error);
  EXPECT_NO_THROW(ss::validate(ss::ModelSpec::marmax({0.7, 0.7}, 4.0, 1.0)));
}

TEST(Simulate, ShapesAndLabels) {
  const auto x = ss::simulate(ss::ModelSpec::marmax({0.5, 0.6, 0.7}, 4.0, 0.5), 100, 1);
  EXPECT_EQ(x.rows(), 100u);
  EXPECT_EQ(x.dim(), 3u);
  EXPECT_EQ(x.labels().size(), 3u);
  for (double v : x.values()) EXPECT_GT(v, 0.0);
}

TEST(Simulate, Deterministic) {
  for (const auto& m : {ss::ModelSpec::burr(2, 2), ss::ModelSpec::frechet(4), ss::ModelSpec::armax(0.7, 4),
                        ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4, 0.5)}) {
    EXPECT_EQ(ss::simulate(m, 300, 42), ss::simulate(m, 300, 42));
    EXPECT_NE(ss::simulate(m, 300, 42), ss::simulate(m, 300, 43));
  }
}

TEST(Simulate, ArmaxStationaryMarginal) {
  const auto x = ss::simulate(ss::ModelSpec::armax(0.7, 4.0), 100000, 2).column(0);
  EXPECT_LT(ks_frechet(x, 4.0), 0.01);
}

TEST(Simulate, MarmaxStationaryMarginals) {
  const auto x = ss::simulate(ss::ModelSpec::marmax({0.5, 0.7, 0.9}, 4.0, 0.5), 100000, 3);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(ks_frechet(x.column(j), 4.0), 0.015) << "coordinate " << j;
}

TEST(Simulate, MarmaxIndependentAtTauOne) {
  const auto x = ss::simulate(ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 1.0), 100000, 4);
  for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    EXPECT_LT(chi_hat(x.column(i), x.column(j), 0.99), 0.05);
  }
}

TEST(Simulate, MarmaxTailDependence) {
  const auto spec = ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5);
  const auto x = ss::simulate(spec, 100000, 5);
  EXPECT_NEAR(chi_hat(x.column(0), x.column(1), 0.99), *ss::oracle(spec).pairwise_tail_dep, 0.05);
}

TEST(Oracle, ExtremalIndexAndQuantiles) {
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::armax(0.7, 4.0)).extremal_index.value(), 1.0 - std::pow(0.7, 4.0), 1e-15);
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::armax(0.7, 4.0)).extremal_index.value(), 0.7599, 1e-12);
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::frechet(4.0)).true_quantile(0.9998), std::pow(-std::log(0.9998), -0.25), 1e-9);
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::frechet(4.0)).true_quantile(0.9998), 8.409, 1e-3);
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::burr(2.0, 2.0)).true_quantile(0.9998), std::sqrt(std::pow(0.0002, -0.5) - 1.0),
              1e-9);
  EXPECT_NEAR(ss::oracle(ss::ModelSpec::burr(2.0, 2.0)).true_quantile(0.9998), 8.349, 1e-3);
}

TEST(Oracle, SpatialIndexes) {
  const auto o = ss::oracle(ss::ModelSpec::marmax({0.7, 0.7, 0.7, 0.7}, 4.0, 0.3));
  for (double m : *o.m_theoretical) EXPECT_NEAR(m, std::pow(4.0, -0.3), 1e-15);
  const auto e = o.extremal_index;
  ASSERT_TRUE(e.has_value());
  EXPECT_GT(*e, 0.0);
  EXPECT_LE(*e, 1.0);
}

TEST(Oracle, TailIndex) {
  EXPECT_EQ(ss::ModelSpec::burr(2.0, 2.0).tail_index(), 4.0);
  EXPECT_EQ(ss::ModelSpec::frechet(3.0).tail_index(), 3.0);
}
