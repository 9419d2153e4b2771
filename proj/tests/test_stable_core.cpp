#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "stablesums/stable/density.hpp"
#include "stablesums/stable/fit.hpp"
#include "stablesums/stable/params.hpp"
#include "stablesums/stable/random.hpp"
#include "stablesums/stats.hpp"

namespace ss = stablesums;
using std::numbers::pi;

TEST(Params, S1ToS0RoundTrip) {
  for (double a : {0.5, 0.9, 1.0, 1.3, 2.0}) {
    for (double beta : {-1.0, 0.0, 0.4, 1.0}) {
      const ss::StableParams p{a, 1.7, beta, -0.3};
      const auto q = ss::to_s1(ss::to_s0(p));
      EXPECT_NEAR(q.a, p.a, 1e-12);
      EXPECT_NEAR(q.sigma, p.sigma, 1e-12);
      EXPECT_NEAR(q.beta, p.beta, 1e-12);
      EXPECT_NEAR(q.mu, p.mu, 1e-12);
      EXPECT_EQ(q.kind, ss::ParamKind::S1);
    }
  }
}

TEST(Params, ValidateRejectsOutOfRange) {
  EXPECT_THROW(ss::validate(ss::StableParams{2.1, 1.0, 0.0, 0.0}), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::StableParams{1.0, -1.0, 0.0, 0.0}), ss::precondition_error);
  EXPECT_THROW(ss::validate(ss::StableParams{1.0, 1.0, 1.5, 0.0}), ss::precondition_error);
}

TEST(CharFn, ClosedForms) {
  EXPECT_NEAR(std::abs(ss::char_fn({2.0, 1.0, 0.0, 0.0}, 1.0) - std::exp(-1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(ss::char_fn({1.0, 1.0, 0.0, 0.0}, 2.0) - std::exp(-2.0)), 0.0, 1e-14);
  const auto one = ss::char_fn({1.3, 2.0, 0.7, 4.0}, 0.0);
  EXPECT_DOUBLE_EQ(one.real(), 1.0);
  EXPECT_DOUBLE_EQ(one.imag(), 0.0);
}

TEST(Pdf, ClosedForms) {
  EXPECT_NEAR(ss::pdf({1.0, 1.0, 0.0, 0.0}, 0.0), 1.0 / pi, 1e-10);
  // a = 2 is Normal(0, 2 sigma^2).
  EXPECT_NEAR(ss::pdf({2.0, 1.0, 0.0, 0.0}, 0.0), 1.0 / (2.0 * std::sqrt(pi)), 1e-10);
  // Levy density sqrt(s / 2 pi) x^{-3/2} exp(-s / 2x).
  EXPECT_NEAR(ss::pdf({0.5, 1.0, 1.0, 0.0}, 1.0), std::exp(-0.5) / std::sqrt(2.0 * pi), 1e-10);
}

TEST(Pdf, LocationScale) {
  const ss::StableParams std1{1.4, 1.0, 0.6, 0.0}, p{1.4, 2.5, 0.6, 0.0};
  for (double x : {-3.0, 0.0, 1.0, 7.0}) {
    // For a != 1, S1 is a pure location-scale family.
    EXPECT_NEAR(ss::pdf(p, x), ss::pdf(std1, x / 2.5) / 2.5, 1e-10);
  }
}

TEST(Cdf, ClosedForms) {
  EXPECT_NEAR(ss::cdf({1.0, 1.0, 0.0, 0.0}, 0.0), 0.5, 1e-10);
  EXPECT_NEAR(ss::cdf({0.5, 1.0, 1.0, 0.0}, 1.0), std::erfc(1.0 / std::sqrt(2.0)), 1e-10);
  for (double x : {-5.0, -1.0, 0.3, 2.0}) {
    EXPECT_NEAR(ss::cdf({1.0, 1.0, 0.0, 0.0}, x), 0.5 + std::atan(x) / pi, 1e-10);
  }
}

TEST(Quantile, ClosedForms) {
  EXPECT_NEAR(ss::quantile(ss::StableParams{1.0, 1.0, 0.0, 0.0}, 0.75), 1.0, 1e-8);
  EXPECT_NEAR(ss::quantile(ss::StableParams{1.0, 1.0, 0.0, 0.0}, 0.5), 0.0, 1e-8);
  EXPECT_NEAR(ss::quantile(ss::StableParams{0.5, 1.0, 1.0, 0.0}, std::erfc(1.0 / std::sqrt(2.0))), 1.0, 1e-8);
}

TEST(Sample, GaussianMoments) {
  const auto x = ss::sample({2.0, 1.0, 0.0, 0.0}, 100000, 17);
  EXPECT_NEAR(ss::mean(x), 0.0, 0.02);
  EXPECT_NEAR(ss::variance(x), 2.0, 0.05);
}

TEST(Sample, LevyIsPositive) {
  const auto x = ss::sample({0.5, 1.0, 1.0, 0.0}, 10000, 3);
  EXPECT_GT(*std::min_element(x.begin(), x.end()), 0.0);
}

TEST(Sample, Deterministic) {
  const ss::StableParams p{1.2, 1.0, 1.0, 0.0};
  EXPECT_EQ(ss::sample(p, 1000, 5), ss::sample(p, 1000, 5));
  EXPECT_NE(ss::sample(p, 1000, 5), ss::sample(p, 1000, 6));
}

TEST(Sample, MatchesCdf) {
  // Kolmogorov distance between the sampler and the numerical cdf.
  const ss::StableParams p{1.5, 1.0, 1.0, 0.0};
  auto x = ss::sample(p, 4000, 8);
  std::sort(x.begin(), x.end());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = ss::cdf(p, x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / x.size()), std::abs(f - static_cast<double>(i + 1) / x.size())});
  }
  EXPECT_LT(d, 1.36 / std::sqrt(4000.0));
}

TEST(FitMle, RecoversParameters) {
  const ss::StableParams truth{1.0, 2.0, 1.0, 5.0};
  const auto fit = ss::fit_mle(ss::sample(truth, 2000, 21), false);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.params.a, 1.0, 0.1);
  EXPECT_NEAR(fit.params.sigma, 2.0, 0.2);
  // The S1 location has a pole at a = 1, so compare it in S0, where it is continuous in a.
  EXPECT_NEAR(ss::to_s0(fit.params).mu, ss::to_s0(truth).mu, 0.5);
  EXPECT_EQ(fit.params.kind, ss::ParamKind::S1);
  EXPECT_TRUE(std::isfinite(fit.loglik));
}

TEST(FitMle, ConstrainedScale) {
  const auto fit = ss::fit_mle(ss::sample({1.0, 1.0, 1.0, 0.0}, 2000, 22), true);
  ASSERT_TRUE(fit.converged);
  EXPECT_TRUE(fit.constrained_a1);
  EXPECT_EQ(fit.params.a, 1.0);
  EXPECT_NEAR(fit.params.sigma, 1.0, 0.15);
}

TEST(FitMle, ConstantDataIsDegenerate) {
  const std::vector<double> x(100, 3.0);
  EXPECT_THROW(ss::fit_mle(x, false), ss::degenerate_data_error);
}

namespace {

// Converged free and a = 1 fits whose log-likelihoods the test sets.
std::pair<ss::StableFit, ss::StableFit> lrt_fits() {
  ss::StableFit f, c;
  f.converged = c.converged = true;
  c.constrained_a1 = true;
  return {f, c};
}

}  // namespace

TEST(Lrt, EqualLikelihoods) {
  auto [f, c] = lrt_fits();
  f.loglik = c.loglik = -100.0;
  const auto r = ss::lrt_a_equals_1(f, c);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-15);
  EXPECT_FALSE(r.reject_at_05);
}

TEST(Lrt, ChiSquaredBoundary) {
  auto [f, c] = lrt_fits();
  c.loglik = -100.0;
  f.loglik = -100.0 + 1.9207294103470;
  const auto r = ss::lrt_a_equals_1(f, c);
  EXPECT_NEAR(r.statistic, 3.841458820694, 1e-9);
  EXPECT_NEAR(r.p_value, 0.05, 1e-9);
  EXPECT_EQ(r.reject_at_05, r.p_value < 0.05);
}

TEST(Lrt, NegativeStatisticClipped) {
  auto [f, c] = lrt_fits();
  c.loglik = -99.0;
  f.loglik = -100.0;
  EXPECT_EQ(ss::lrt_a_equals_1(f, c).statistic, 0.0);
}

TEST(Lrt, SizeUnderNull) {
  int rejected = 0;
  constexpr int reps = 500;
  for (int r = 0; r < reps; ++r) {
    const auto x = ss::sample({1.0, 1.0, 1.0, 0.0}, 200, 1000 + r);
    const auto c = ss::fit_mle(x, true);
    auto f = ss::fit_mle(x, false);
    if (f.loglik < c.loglik) {
      ss::FitOptions o;
      o.start = c.params;
      f = ss::fit_mle(x, false, o);
    }
    rejected += ss::lrt_a_equals_1(f, c).reject_at_05 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(rejected) / reps, 0.05, 0.03);
}
