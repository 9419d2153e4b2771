#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "stablesums.hpp"

namespace ss = stablesums;
namespace fs = std::filesystem;
using ss::json;

namespace {

ss::io::StationTable parse(const std::string& text, const ss::io::CsvSchema& schema = {}) {
  std::istringstream in(text);
  return ss::io::parse_csv(in, schema);
}

fs::path temp_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("stablesums_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const auto err = temp_dir() / "stderr.txt";
  const std::string cmd = std::string(STABLESUMS_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = temp_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(Csv, IncompleteRowsDropped) {
  const auto t = parse("date,a,b,c\n2000-01-01,1,2,3\n2000-01-02,4,,6\n2000-01-03,7,8,9\n");
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_EQ(t.incomplete_rows(), 1u);
  const auto x = t.complete();
  EXPECT_EQ(x.rows(), 2u);
  EXPECT_EQ(x.values(), (std::vector<double>{1, 2, 3, 7, 8, 9}));
  EXPECT_EQ(x.labels(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Csv, SeasonFilter) {
  std::ostringstream text;
  text << "date,x\n";
  ss::io::Date d{2001, 1, 1};
  for (int i = 0; i < 365; ++i) text << d.plus_days(i).iso() << ',' << i << '\n';
  ss::io::CsvSchema schema;
  schema.months = std::set<int>{9, 10, 11};
  const auto t = parse(text.str(), schema);
  EXPECT_EQ(t.rows(), 30u + 31u + 30u);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    EXPECT_GE(t.dates[i].month, 9);
    EXPECT_LE(t.dates[i].month, 11);
    if (i > 0) EXPECT_LT(t.dates[i - 1], t.dates[i]);
  }
}

TEST(Csv, SortsByDate) {
  const auto t = parse("date,x\n2000-01-03,3\n2000-01-01,1\n2000-01-02,2\n");
  EXPECT_EQ(t.complete().values(), (std::vector<double>{1, 2, 3}));
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse("date,x\n2000-01-01,1\n2000-01-01,2\n"), ss::precondition_error);
  EXPECT_THROW(parse("date,x\n2000-13-01,1\n"), ss::precondition_error);
  EXPECT_THROW(parse("date,x\n01/02/2000,1\n"), ss::precondition_error);
  EXPECT_THROW(parse("date,x\n2000-01-01,abc\n"), ss::precondition_error);
  EXPECT_THROW(parse("day,x\n2000-01-01,1\n"), ss::precondition_error);
  EXPECT_THROW(parse(""), ss::precondition_error);
  EXPECT_THROW(ss::io::load_csv((temp_dir() / "missing.csv").string()), ss::precondition_error);
}

TEST(Csv, CustomDateColumnAndMissingMarkers) {
  ss::io::CsvSchema schema;
  schema.date_column = "day";
  const auto t = parse("x,day,y\n1.5,2000-02-29,NA\n2,2000-03-01,3\n", schema);
  EXPECT_EQ(t.station_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(t.incomplete_rows(), 1u);
  EXPECT_EQ(t.values[0][0], 1.5);
}

TEST(Csv, RoundTrip) {
  auto t = ss::io::from_series(ss::simulate(ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5), 400, 3));
  t.values[5][1].reset();
  std::ostringstream out;
  ss::io::write_csv(t, out);
  EXPECT_EQ(parse(out.str()), t);
}

TEST(Pipeline, TooFewRows) {
  const auto t = ss::io::from_series(ss::simulate(ss::ModelSpec::frechet(4.0), 100, 1));
  EXPECT_THROW(ss::io::run_case_study_pipeline(t, {}), ss::precondition_error);
}

TEST(Pipeline, ConfigValidation) {
  ss::io::PipelineConfig c;
  c.threshold_quantile = 0.4;
  EXPECT_THROW(ss::io::validate(c), ss::precondition_error);
  c = {};
  c.k_values.clear();
  EXPECT_THROW(ss::io::validate(c), ss::precondition_error);
}

TEST(Pipeline, UnivariateBranch) {
  const auto t = ss::io::from_series(ss::simulate(ss::ModelSpec::frechet(4.0), 2000, 2));
  ss::io::PipelineConfig c;
  c.k_values = {150};
  c.classical = false;
  const auto r = ss::io::run_case_study_pipeline(t, c);
  ASSERT_EQ(r.per_k.size(), 1u);
  ASSERT_TRUE(r.per_k[0].m_hat.has_value());
  EXPECT_EQ(r.per_k[0].m_hat->m, (std::vector<double>{1.0}));
}

TEST(Pipeline, ReportProvenanceAndDeterminism) {
  const auto t = ss::io::from_series(ss::simulate(ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5), 2000, 4));
  ss::io::PipelineConfig c;
  c.k_values = {150, 250};
  c.T_years = {50.0};
  c.seed = 9;
  const auto a = ss::io::to_json(ss::io::run_case_study_pipeline(t, c));
  const auto b = ss::io::to_json(ss::io::run_case_study_pipeline(t, c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["schema_version"], ss::kSchemaVersion);
  EXPECT_EQ(a["n_rows"], 2000);
  for (const auto& e : a["per_k"]) {
    EXPECT_TRUE(e.contains("k"));
    EXPECT_TRUE(e.contains("alpha_hat"));
    EXPECT_TRUE(e.contains("b"));
    for (const auto& q : e["qq"]) {
      EXPECT_EQ(q["k"], e["k"]);
      EXPECT_EQ(q["b"], e["b"]);
      EXPECT_EQ(q["alpha_hat"], e["alpha_hat"]);
    }
    for (const auto& est : e["estimates"]) EXPECT_EQ(est["k"], e["k"]);
  }
}

TEST(Pipeline, MarmaxCoverage) {
  const auto spec = ss::ModelSpec::marmax({0.7, 0.7, 0.7}, 4.0, 0.5);
  const double truth = ss::true_return_level(spec, 5000.0);
  int covered = 0, total = 0;
  for (int s = 0; s < 100; ++s) {
    const auto t = ss::io::from_series(ss::simulate(spec, 4000, 500 + s));
    ss::io::PipelineConfig c;
    c.k_values = {250};
    c.T_years = {50.0};
    c.classical = false;
    c.seed = static_cast<std::uint64_t>(s);
    const auto r = ss::io::run_case_study_pipeline(t, c);
    const auto& e = r.per_k[0].estimates;
    for (std::size_t j = 0; j < 3; ++j) {
      ++total;
      if (!e.empty() && e[0].accepted) covered += (e[0].ci_low[j] <= truth && truth <= e[0].ci_high[j]) ? 1 : 0;
    }
  }
  EXPECT_GE(static_cast<double>(covered) / total, 0.85);
}

TEST(Json, Envelope) {
  const auto e = ss::return_level_envelope("pot", {"a", "b"});
  EXPECT_EQ(e["schema_version"], ss::kSchemaVersion);
  EXPECT_EQ(e["method"], "pot");
  EXPECT_TRUE(e["results"].is_array());
}

TEST(Cli, SimulateIsDeterministic) {
  const auto a = run_cli("simulate --model armax --n 300 --seed 5");
  const auto b = run_cli("simulate --model armax --n 300 --seed 5");
  const auto c = run_cli("simulate --model armax --n 300 --seed 6");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  const auto t = parse(a.out);
  EXPECT_EQ(t.rows(), 300u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("simulate --bogus").code, 2);
  EXPECT_EQ(run_cli("pot --input " + (temp_dir() / "missing.csv").string()).code, 2);
  EXPECT_EQ(run_cli("simulate --model marmax --tau 2").code, 2);
  const auto bad = write_file("bad.csv", "date,x\n2000-01-01,1\n2000-01-01,2\n");
  EXPECT_EQ(run_cli("pot --input " + bad).code, 2);
}

TEST(Cli, ConfigPrecedence) {
  const auto cfg = write_file("cfg.json", R"({"model": "frechet", "n": 50, "seed": 5})");
  const auto from_cfg = run_cli("simulate --config " + cfg);
  ASSERT_EQ(from_cfg.code, 0);
  EXPECT_EQ(parse(from_cfg.out).rows(), 50u);
  EXPECT_EQ(from_cfg.out, run_cli("simulate --model frechet --n 50 --seed 5").out);
  const auto cli_wins = run_cli("simulate --config " + cfg + " --n 70");
  EXPECT_EQ(parse(cli_wins.out).rows(), 70u);
  const auto unknown = write_file("unknown.json", R"({"nope": 1})");
  EXPECT_EQ(run_cli("simulate --config " + unknown).code, 2);
}

TEST(Cli, StableSumsJson) {
  const auto csv = write_file("frechet.csv", run_cli("simulate --model frechet --n 4000 --seed 1").out);
  const auto r = run_cli("stable-sums --input " + csv + " --alpha 4 --block-length 64 --R 20 --seed 3");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], ss::kSchemaVersion);
  EXPECT_TRUE(j["results"].is_array());
  EXPECT_EQ(r.out, run_cli("stable-sums --input " + csv + " --alpha 4 --block-length 64 --R 20 --seed 3").out);
}

TEST(Cli, OutputFile) {
  const auto path = (temp_dir() / "sim.csv").string();
  ASSERT_EQ(run_cli("simulate --n 20 --output " + path).code, 0);
  EXPECT_EQ(ss::io::load_csv(path).rows(), 20u);
}
