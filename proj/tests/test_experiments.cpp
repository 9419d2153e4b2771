#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stablesums/experiments.hpp"

namespace ss = stablesums;

namespace {

ss::McConfig small_config(const ss::ModelSpec& m, std::vector<ss::Method> methods, std::size_t reps) {
  ss::McConfig c;
  c.model = m;
  c.n = 4000;
  c.n_reps = reps;
  c.T_years = {50.0};
  c.methods = std::move(methods);
  c.block_lengths = {64};
  c.univariate_too = false;
  c.seed = 11;
  return c;
}

void expect_cell_invariants(const ss::McCell& c) {
  EXPECT_GE(c.coverage(), 0.0);
  EXPECT_LE(c.coverage(), 1.0);
  EXPECT_GE(c.acceptance_rate(), 0.0);
  EXPECT_LE(c.acceptance_rate(), 1.0);
  const auto bias = c.bias(), var = c.variance(), mse = c.mse();
  for (std::size_t j = 0; j < c.truth.size(); ++j) {
    if (!std::isfinite(mse[j])) continue;
    // Recompute each term from the raw estimates.
    const auto v = c.accepted_estimates(j);
    double m = 0.0, s2 = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) s2 += (x - c.truth[j]) * (x - c.truth[j]);
    s2 /= static_cast<double>(v.size());
    EXPECT_NEAR(mse[j], s2, 1e-12 * s2);
    EXPECT_NEAR(bias[j], m - c.truth[j], 1e-12 * std::abs(c.truth[j]));
    EXPECT_NEAR(mse[j], bias[j] * bias[j] + var[j], 1e-9 * mse[j]);
  }
}

// Shared mARMAX(tau = 0.5) study with multivariate and univariate stable cells.
const ss::McSummary& marmax_study() {
  static const ss::McSummary s = [] {
    ss::McConfig c;
    c.model = ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5);
    c.n_reps = 200;
    c.T_years = {50.0};
    c.methods = {ss::Method::Stable};
    c.block_lengths = {32, 64};
    c.univariate_too = true;
    c.seed = 3;
    return ss::run_coverage_study(c);
  }();
  return s;
}

}  // namespace

TEST(McConfig, Validate) {
  auto c = small_config(ss::ModelSpec::frechet(4.0), {ss::Method::Stable}, 10);
  EXPECT_NO_THROW(ss::validate(c));
  auto bad = c;
  bad.n_reps = 0;
  EXPECT_THROW(ss::validate(bad), ss::precondition_error);
  bad = c;
  bad.obs_per_year = 0;
  EXPECT_THROW(ss::validate(bad), ss::precondition_error);
  bad = c;
  bad.T_years = {0.5};  // 50 observations, below the 64-block
  EXPECT_THROW(ss::validate(bad), ss::precondition_error);
}

TEST(CoverageStudy, SingleReplicate) {
  auto c = small_config(ss::ModelSpec::frechet(4.0), {ss::Method::Stable, ss::Method::Pot}, 1);
  const auto s = ss::run_coverage_study(c);
  for (const auto& cell : s.cells) {
    EXPECT_EQ(cell.n_reps, 1u);
    if (cell.n_accepted[0] == 1) {
      EXPECT_TRUE(cell.coverage() == 0.0 || cell.coverage() == 1.0);
    }
    EXPECT_TRUE(cell.coverage_all() == 0.0 || cell.coverage_all() == 1.0);
  }
}

TEST(CoverageStudy, BurrPotUndercovers) {
  auto c = small_config(ss::ModelSpec::burr(2.0, 2.0), {ss::Method::Pot}, 200);
  c.k_exponent = 0.7;
  const auto s = ss::run_coverage_study(c);
  const auto* cell = s.find(ss::Method::Pot, 0, 50.0);
  ASSERT_NE(cell, nullptr);
  expect_cell_invariants(*cell);
  EXPECT_NEAR(cell->coverage(), 0.85, 0.06);
}

TEST(CoverageStudy, FrechetStable64) {
  const auto s = ss::run_coverage_study(small_config(ss::ModelSpec::frechet(4.0), {ss::Method::Stable}, 200));
  const auto* cell = s.find(ss::Method::Stable, 64, 50.0, "mv");
  ASSERT_NE(cell, nullptr);
  expect_cell_invariants(*cell);
  EXPECT_NEAR(cell->coverage(), 0.99, 0.05);
  EXPECT_NEAR(cell->acceptance_rate(), 0.90, 0.06);
}

TEST(CoverageStudy, Deterministic) {
  auto c = small_config(ss::ModelSpec::armax(0.7, 4.0), {ss::Method::Stable, ss::Method::Pot, ss::Method::BlockMaxima}, 6);
  const auto a = ss::run_coverage_study(c);
  c.workers = 1;
  const auto b = ss::run_coverage_study(c);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].estimates, b.cells[i].estimates);
    EXPECT_EQ(a.cells[i].n_covered, b.cells[i].n_covered);
    EXPECT_EQ(a.cells[i].n_accepted, b.cells[i].n_accepted);
    EXPECT_EQ(a.cells[i].n_failed, b.cells[i].n_failed);
  }
}

TEST(CoverageStudy, FindCells) {
  auto c = small_config(ss::ModelSpec::frechet(4.0), {ss::Method::Stable, ss::Method::Pot, ss::Method::BlockMaxima}, 2);
  const auto s = ss::run_coverage_study(c);
  EXPECT_NE(s.find(ss::Method::Stable, 64, 50.0, "mv"), nullptr);
  EXPECT_NE(s.find(ss::Method::Pot, 0, 50.0), nullptr);
  EXPECT_NE(s.find(ss::Method::BlockMaxima, 20, 50.0), nullptr);
  EXPECT_EQ(s.find(ss::Method::Stable, 32, 50.0, "mv"), nullptr);
  EXPECT_EQ(s.find(ss::Method::Pot, 0, 20.0), nullptr);
}

TEST(RelativeChange, Identical) {
  const std::vector<double> v{1.0, 2.0, 4.0};
  EXPECT_EQ(ss::relative_change(v, v, 2.5), 0.0);
  EXPECT_EQ(ss::relative_change(v, v, 2.5, ss::ChangeMetric::Variance), 0.0);
}

TEST(RelativeChange, HalvedMse) {
  const std::vector<double> mv{1.0, -1.0}, uv{std::sqrt(2.0), -std::sqrt(2.0)};
  EXPECT_NEAR(ss::relative_change(mv, uv, 0.0), 50.0, 1e-12);
}

TEST(RelativeChange, Preconditions) {
  const std::vector<double> a{1.0, 1.0}, b{1.0};
  EXPECT_THROW(ss::relative_change(a, b, 0.0), ss::precondition_error);
  EXPECT_THROW(ss::relative_change(a, a, 1.0), ss::precondition_error);
}

TEST(RelativeChange, MarmaxMultivariateImproves) {
  const auto& s = marmax_study();
  for (std::size_t b : {32u, 64u}) {
    const auto* mv = s.find(ss::Method::Stable, b, 50.0, "mv");
    const auto* uv = s.find(ss::Method::Stable, b, 50.0, "uv");
    ASSERT_NE(mv, nullptr);
    ASSERT_NE(uv, nullptr);
    const auto p = ss::paired_relative_change(*mv, *uv, 2, ss::ChangeMetric::Mse, 0.90, 2000, 7);
    EXPECT_GT(p.estimate, 0.0) << "b = " << b;
    EXPECT_LE(p.low, p.estimate);
    EXPECT_GE(p.high, p.estimate);
  }
}

TEST(McSummary, MseDecomposition) {
  for (const auto& c : marmax_study().cells) expect_cell_invariants(c);
}

TEST(PairedChange, Deterministic) {
  const auto& s = marmax_study();
  const auto* mv = s.find(ss::Method::Stable, 32, 50.0, "mv");
  const auto* uv = s.find(ss::Method::Stable, 32, 50.0, "uv");
  const auto a = ss::paired_relative_change(*mv, *uv, 0, ss::ChangeMetric::Mse, 0.9, 500, 1);
  const auto b = ss::paired_relative_change(*mv, *uv, 0, ss::ChangeMetric::Mse, 0.9, 500, 1);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  EXPECT_GE(a.n_pairs, 2u);
}

TEST(TrueReturnLevel, ClosedForms) {
  const double frechet = std::pow(-std::log1p(-1.0 / 5000.0), -0.25);
  EXPECT_NEAR(ss::true_return_level(ss::ModelSpec::frechet(4.0), 5000.0), frechet, 1e-12);
  EXPECT_NEAR(ss::true_return_level(ss::ModelSpec::frechet(4.0), 5000.0), 8.409, 1e-3);
  EXPECT_NEAR(ss::true_return_level(ss::ModelSpec::burr(2.0, 2.0), 5000.0), std::sqrt(std::sqrt(5000.0) - 1.0), 1e-9);
  EXPECT_NEAR(ss::true_return_level(ss::ModelSpec::burr(2.0, 2.0), 5000.0), 8.349, 1e-3);
  EXPECT_EQ(ss::true_return_level(ss::ModelSpec::armax(0.7, 4.0), 5000.0),
            ss::true_return_level(ss::ModelSpec::frechet(4.0), 5000.0));
  EXPECT_EQ(ss::true_return_level(ss::ModelSpec::armax(0.3, 4.0), 5000.0),
            ss::true_return_level(ss::ModelSpec::armax(0.9, 4.0), 5000.0));
  EXPECT_THROW(ss::true_return_level(ss::ModelSpec::frechet(4.0), 5000.0, 1), ss::precondition_error);
}
