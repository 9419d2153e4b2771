#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablesums.hpp"

namespace ss = stablesums;
using ss::json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Options that can also be given in a --config JSON object keyed by the
/// long option name. Command-line values win over config values.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with option values");
    opt("seed", seed, "master seed");
    opt("output", output, "output path (default: stdout)");
  }

  template <class T>
  CLI::Option* opt(const std::string& name, T& var, const std::string& desc) {
    auto* o = app_->add_option("--" + name, var, desc);
    setters_[name] = [o, &var](const json& j) {
      if (o->count() == 0) var = j.get<T>();
    };
    return o;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    auto* o = app_->add_flag("--" + name, var, desc);
    setters_[name] = [o, &var](const json& j) {
      if (o->count() == 0) var = j.get<bool>();
    };
    return o;
  }

  void apply_config() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw ss::precondition_error("cannot open config '" + config_path_ + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ss::precondition_error("config '" + config_path_ + "': " + e.what());
    }
    if (!j.is_object()) throw ss::precondition_error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end()) throw ss::precondition_error("unknown config key '" + key + "'");
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw ss::precondition_error("config key '" + key + "': " + e.what());
      }
    }
  }

  std::uint64_t seed = 0;
  std::string output;

 private:
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

void write_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw ss::precondition_error("cannot write '" + path + "'");
  fn(out);
}

void write_json(const std::string& path, const json& j) {
  write_output(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

struct InputOptions {
  std::string input;
  std::string date_column = "date";
  std::vector<int> months;

  void bind(Binder& b) {
    b.opt("input", input, "station CSV (date column plus one column per station)");
    b.opt("date-column", date_column, "name of the date column");
    b.opt("months", months, "keep only these months (1-12)");
  }

  ss::io::StationTable load() const {
    if (input.empty()) throw ss::precondition_error("--input is required");
    ss::io::CsvSchema schema;
    schema.date_column = date_column;
    if (!months.empty()) schema.months = std::set<int>(months.begin(), months.end());
    return ss::io::load_csv(input, schema);
  }
};

std::vector<double> to_obs(const std::vector<double>& years, std::size_t per_year) {
  std::vector<double> t;
  for (double y : years) t.push_back(y * static_cast<double>(per_year));
  return t;
}

ss::ModelSpec model_from(const std::string& kind, double c, double kappa, double alpha, std::vector<double> lambda,
                         double tau, std::size_t d) {
  ss::ModelSpec m;
  m.kind = ss::model_kind_from_string(kind);
  m.c = c;
  m.kappa = kappa;
  m.alpha = alpha;
  m.tau = tau;
  if (m.kind == ss::ModelKind::MArmax && lambda.size() == 1 && d > 1) lambda.assign(d, lambda[0]);
  m.lambda = lambda;
  m.d = m.kind == ss::ModelKind::MArmax ? lambda.size() : 1;
  ss::validate(m);
  return m;
}

struct ModelOptions {
  std::string kind = "frechet";
  double c = 2.0, kappa = 2.0, alpha = 4.0, tau = 0.5;
  std::vector<double> lambda{0.7};
  std::size_t d = 3;

  void bind(Binder& b) {
    b.opt("model", kind, "burr, frechet, armax or marmax");
    b.opt("c", c, "Burr shape c");
    b.opt("kappa", kappa, "Burr shape kappa");
    b.opt("alpha", alpha, "tail index of the Frechet-type models");
    b.opt("lambda", lambda, "ARMAX coefficient(s); one per coordinate for marmax");
    b.opt("tau", tau, "mARMAX spatial dependence in (0, 1]");
    b.opt("d", d, "mARMAX dimension when a single lambda is given");
  }

  ss::ModelSpec spec() const { return model_from(kind, c, kappa, alpha, lambda, tau, d); }
};

ss::RhoRule rho_rule(const std::string& s) { return ss::rho_rule_from_string(s); }

/// alpha_hat from --alpha if given, otherwise unbiased Hill on the norms.
ss::TailFit tail_fit(const ss::MultiSeries& x, double alpha, std::size_t k, const std::string& rule) {
  if (alpha > 0.0) return {alpha, 1.0 / alpha, 0, 0.0, false, false};
  if (k == 0) throw ss::precondition_error("give --alpha or --k");
  return ss::unbiased_hill(x.norms(), k, ss::RhoEstimator::LogMoments, rho_rule(rule));
}

void add_simulate(CLI::App& app) {
  auto* sub = app.add_subcommand("simulate", "simulate a model path and write it as station CSV");
  auto b = std::make_shared<Binder>(sub);
  auto m = std::make_shared<ModelOptions>();
  auto n = std::make_shared<std::size_t>(4000);
  auto start = std::make_shared<std::string>("2000-01-01");
  m->bind(*b);
  b->opt("n", *n, "path length");
  b->opt("start-date", *start, "date of the first row");
  sub->callback([=] {
    b->apply_config();
    const auto x = ss::simulate(m->spec(), *n, b->seed);
    const auto t = ss::io::from_series(x, ss::io::Date::parse(*start));
    write_output(b->output, [&](std::ostream& o) { ss::io::write_csv(t, o); });
  });
}

void add_fit_stable(CLI::App& app) {
  auto* sub = app.add_subcommand("fit-stable", "fit beta = 1 stable laws (free and a = 1) with the ratio test");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto station = std::make_shared<std::string>();
  auto block = std::make_shared<std::size_t>(1);
  auto power = std::make_shared<double>(1.0);
  in->bind(*b);
  b->opt("station", *station, "fit this column (default: the supremum norm)");
  b->opt("block-length", *block, "sum this many consecutive values first");
  b->opt("power", *power, "raise absolute values to this power before summing");
  sub->callback([=] {
    b->apply_config();
    const auto table = in->load();
    auto x = table.complete();
    if (!station->empty()) {
      const auto& l = x.labels();
      const auto it = std::find(l.begin(), l.end(), *station);
      if (it == l.end()) throw ss::precondition_error("unknown station '" + *station + "'");
      x = x.select_column(static_cast<std::size_t>(it - l.begin()));
    }
    std::vector<double> data;
    if (*block == 1 && *power == 1.0 && x.dim() == 1) {
      data = x.column(0);
    } else {
      data = ss::block_sums(x, *block, *power).sums;
    }
    const auto constrained = ss::fit_mle(data, true);
    const auto free = ss::fit_mle(data, false);
    json out = {{"schema_version", ss::kSchemaVersion},
                {"n", data.size()},
                {"block_length", *block},
                {"power", *power},
                {"free_fit", free},
                {"constrained_fit", constrained}};
    if (free.converged && constrained.converged) out["lrt"] = ss::lrt_a_equals_1(free, constrained);
    if (!free.converged && !constrained.converged) throw ss::convergence_error("fit-stable: neither fit converged");
    write_json(b->output, out);
  });
}

struct ReturnPeriodOptions {
  std::vector<double> T_years{20.0, 50.0, 100.0};
  std::size_t obs_per_year = 100;
  double ci_level = 0.95;

  void bind(Binder& b) {
    b.opt("T-years", T_years, "return periods in years");
    b.opt("obs-per-year", obs_per_year, "observations per year");
    b.opt("ci-level", ci_level, "confidence level");
  }
};

void add_stable_sums(CLI::App& app) {
  auto* sub = app.add_subcommand("stable-sums", "stable sums return levels with bootstrap intervals");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto rp = std::make_shared<ReturnPeriodOptions>();
  struct Opts {
    double alpha = 0.0;
    std::size_t k = 0;
    std::size_t block = 0;
    std::size_t R = 100;
    double tq = 0.95;
    std::string policy = "paper_min_pvalue";
    std::string rho = "large_k";
    std::size_t min_block = 32;
    std::size_t max_acceptances = 20;
    unsigned workers = 0;
  };
  auto o = std::make_shared<Opts>();
  in->bind(*b);
  rp->bind(*b);
  b->opt("alpha", o->alpha, "tail index (default: unbiased Hill with --k)");
  b->opt("k", o->k, "order statistics for the tail index");
  b->opt("block-length", o->block, "sum length (default: selected by --policy)");
  b->opt("R", o->R, "bootstrap replicates");
  b->opt("threshold-quantile", o->tq, "norm quantile for the spatial indexes");
  b->opt("policy", o->policy, "paper_min_pvalue, max_pvalue or first_accepted");
  b->opt("rho-rule", o->rho, "median_to_k or large_k");
  b->opt("min-block", o->min_block, "only sum lengths above this are chosen");
  b->opt("max-acceptances", o->max_acceptances, "compare only the first this-many acceptances");
  b->opt("workers", o->workers, "worker threads (0: all cores)");
  sub->callback([=] {
    b->apply_config();
    const auto table = in->load();
    const auto x = table.complete();
    const auto tail = tail_fit(x, o->alpha, o->k, o->rho);
    const auto m_hat = ss::spatial_indexes(x, tail.alpha_hat, o->tq);
    json out = ss::return_level_envelope("stable_sums", x.labels());
    out["n_rows"] = x.rows();
    out["n_dropped_incomplete"] = table.incomplete_rows();
    out["tail_fit"] = tail;
    out["m_hat"] = m_hat;
    out["metadata"] = {{"ci_method", "percentile_bootstrap"}, {"R", o->R}, {"seed", b->seed}};
    std::size_t block = o->block;
    if (block == 0) {
      std::vector<std::size_t> cand;
      for (std::size_t c = 2; x.rows() / c >= 20; ++c) cand.push_back(c);
      ss::SelectionOptions so;
      so.min_block = o->min_block;
      so.max_acceptances = o->max_acceptances;
      so.workers = o->workers;
      const auto sel = ss::select_block_length(x, tail.alpha_hat, cand, ss::block_policy_from_string(o->policy), so);
      out["block_selection"] = sel;
      if (!sel.chosen) {
        write_json(b->output, out);
        return;
      }
      block = *sel.chosen;
    }
    ss::BootstrapOptions bo;
    bo.R = o->R;
    bo.level = rp->ci_level;
    bo.seed = b->seed;
    bo.workers = o->workers;
    auto est = ss::estimate_return_levels_multi(x, block, tail.alpha_hat, m_hat, to_obs(rp->T_years, rp->obs_per_year), bo);
    for (std::size_t i = 0; i < est.size(); ++i) {
      est[i].k = tail.k;
      json r = est[i];
      r["T_years"] = rp->T_years[i];
      out["results"].push_back(r);
    }
    write_json(b->output, out);
  });
}

void add_pot(CLI::App& app) {
  auto* sub = app.add_subcommand("pot", "peaks over threshold with intervals declustering");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto rp = std::make_shared<ReturnPeriodOptions>();
  auto tq = std::make_shared<double>(0.95);
  auto no_decluster = std::make_shared<bool>(false);
  in->bind(*b);
  rp->bind(*b);
  b->opt("threshold-quantile", *tq, "threshold as an empirical quantile");
  b->flag("no-decluster", *no_decluster, "fit all exceedances with theta = 1");
  sub->callback([=] {
    b->apply_config();
    const auto table = in->load();
    const auto x = table.complete();
    const auto T_obs = to_obs(rp->T_years, rp->obs_per_year);
    json out = ss::return_level_envelope("pot", x.labels());
    out["metadata"] = {{"ci_method", "delta"}, {"declustered", !*no_decluster}, {"threshold_quantile", *tq}};
    std::vector<ss::ReturnLevelCi> levels;
    json fits = json::array();
    for (std::size_t j = 0; j < x.dim(); ++j) {
      const auto col = x.column(j);
      double theta = 1.0, u = 0.0;
      std::size_t n_exceed = 0;
      std::vector<double> excess;
      if (*no_decluster) {
        u = ss::detail::exceedance_threshold(col, *tq);
        for (double v : col) {
          if (v > u) excess.push_back(v - u);
        }
        n_exceed = excess.size();
      } else {
        const auto dc = ss::decluster_intervals(col, *tq);
        theta = dc.theta;
        u = dc.threshold;
        n_exceed = dc.n_exceed;
        for (double v : dc.maxima) excess.push_back(v - u);
      }
      const auto fit = ss::fit_gpd(excess, u, n_exceed, col.size());
      if (!fit.converged) throw ss::convergence_error("pot: GPD fit did not converge");
      fits.push_back({{"station", x.labels()[j]}, {"fit", fit}, {"theta", theta}});
      for (double T : T_obs) levels.push_back(ss::pot_return_level(fit, T, theta, rp->ci_level));
    }
    out["fits"] = fits;
    for (std::size_t t = 0; t < T_obs.size(); ++t) {
      json r = {{"T_years", rp->T_years[t]}, {"T_obs", T_obs[t]}, {"accepted", true}};
      for (std::size_t j = 0; j < x.dim(); ++j) {
        const auto& l = levels[j * T_obs.size() + t];
        r["z"].push_back(l.z);
        r["ci_low"].push_back(l.low);
        r["ci_high"].push_back(l.high);
        r["se"].push_back(l.se);
      }
      out["results"].push_back(r);
    }
    write_json(b->output, out);
  });
}

void add_block_maxima(CLI::App& app) {
  auto* sub = app.add_subcommand("block-maxima", "GEV on block maxima with extremal index correction");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto rp = std::make_shared<ReturnPeriodOptions>();
  auto block = std::make_shared<std::size_t>(20);
  auto tq = std::make_shared<double>(0.95);
  auto no_theta = std::make_shared<bool>(false);
  in->bind(*b);
  rp->bind(*b);
  b->opt("block-length", *block, "block length");
  b->opt("threshold-quantile", *tq, "threshold for the extremal index estimate");
  b->flag("no-theta", *no_theta, "use theta = 1");
  sub->callback([=] {
    b->apply_config();
    const auto table = in->load();
    const auto x = table.complete();
    const auto T_obs = to_obs(rp->T_years, rp->obs_per_year);
    json out = ss::return_level_envelope("block_maxima", x.labels());
    out["metadata"] = {{"ci_method", "delta"}, {"block_length", *block}};
    std::vector<ss::ReturnLevelCi> levels;
    json fits = json::array();
    for (std::size_t j = 0; j < x.dim(); ++j) {
      const auto col = x.column(j);
      const double theta = *no_theta ? 1.0 : ss::ferro_segers_theta(col, *tq).theta;
      const auto fit = ss::fit_gev(ss::block_maxima(col, *block), *block, theta);
      if (!fit.converged) throw ss::convergence_error("block-maxima: GEV fit did not converge");
      fits.push_back({{"station", x.labels()[j]}, {"fit", fit}});
      for (double T : T_obs) levels.push_back(ss::block_maxima_return_level(fit, T, rp->ci_level));
    }
    out["fits"] = fits;
    for (std::size_t t = 0; t < T_obs.size(); ++t) {
      json r = {{"T_years", rp->T_years[t]}, {"T_obs", T_obs[t]}, {"accepted", true}};
      for (std::size_t j = 0; j < x.dim(); ++j) {
        const auto& l = levels[j * T_obs.size() + t];
        r["z"].push_back(l.z);
        r["ci_low"].push_back(l.low);
        r["ci_high"].push_back(l.high);
        r["se"].push_back(l.se);
      }
      out["results"].push_back(r);
    }
    write_json(b->output, out);
  });
}

void add_extremogram(CLI::App& app) {
  auto* sub = app.add_subcommand("extremogram", "temporal extremogram of the norm and of each station (CSV)");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto max_lag = std::make_shared<std::size_t>(20);
  auto tq = std::make_shared<double>(0.95);
  in->bind(*b);
  b->opt("max-lag", *max_lag, "largest lag");
  b->opt("threshold-quantile", *tq, "threshold as an empirical quantile");
  sub->callback([=] {
    b->apply_config();
    const auto x = in->load().complete();
    std::vector<std::pair<std::string, ss::Extremogram>> rows;
    rows.emplace_back("norm", ss::extremogram(x, *max_lag, *tq));
    if (x.dim() > 1) {
      for (std::size_t j = 0; j < x.dim(); ++j) {
        const auto col = x.column(j);
        rows.emplace_back(x.labels()[j], ss::extremogram(std::span<const double>(col), *max_lag, *tq));
      }
    }
    write_output(b->output, [&](std::ostream& o) {
      o << "series,lag,value,baseline\n";
      o.precision(17);
      for (const auto& [name, e] : rows) {
        for (std::size_t i = 0; i < e.lags.size(); ++i) {
          o << name << ',' << e.lags[i] << ',' << e.values[i] << ',' << e.baseline << '\n';
        }
      }
    });
  });
}

void add_qq(CLI::App& app) {
  auto* sub = app.add_subcommand("qq", "stable qq diagnostics (CSV)");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  struct Opts {
    double alpha = 0.0;
    std::size_t k = 0;
    std::size_t block = 0;
    std::string mode = "all";
    double tq = 0.95;
    std::string rho = "large_k";
  };
  auto o = std::make_shared<Opts>();
  in->bind(*b);
  b->opt("alpha", o->alpha, "tail index (default: unbiased Hill with --k)");
  b->opt("k", o->k, "order statistics for the tail index");
  b->opt("block-length", o->block, "sum length")->required();
  b->opt("mode", o->mode, "radial, marginal_mv, marginal_uv or all");
  b->opt("threshold-quantile", o->tq, "norm quantile for the spatial indexes");
  b->opt("rho-rule", o->rho, "median_to_k or large_k");
  sub->callback([=] {
    b->apply_config();
    const auto x = in->load().complete();
    const auto tail = tail_fit(x, o->alpha, o->k, o->rho);
    const auto m_hat = ss::spatial_indexes(x, tail.alpha_hat, o->tq);
    const auto fit = ss::fit_mle(ss::block_sums(x, o->block, tail.alpha_hat).sums, true);
    if (!fit.converged) throw ss::convergence_error("qq: a = 1 fit did not converge");
    std::vector<ss::QqTable> tables;
    const bool all = o->mode == "all";
    if (all || o->mode == "radial") {
      tables.push_back(ss::qq_stable_diagnostics(x, fit, o->block, tail.alpha_hat, m_hat, ss::QqMode::Radial));
    }
    for (std::size_t j = 0; j < x.dim(); ++j) {
      if (all || o->mode == "marginal_mv") {
        tables.push_back(
            ss::qq_stable_diagnostics(x, fit, o->block, tail.alpha_hat, m_hat, ss::QqMode::MarginalMv, j));
      }
      if (all || o->mode == "marginal_uv") {
        const auto uv = ss::fit_mle(ss::block_sums(x.select_column(j), o->block, tail.alpha_hat).sums, true);
        tables.push_back(ss::qq_stable_diagnostics(x, uv, o->block, tail.alpha_hat, m_hat, ss::QqMode::MarginalUv, j));
      }
    }
    if (tables.empty()) throw ss::precondition_error("unknown qq mode '" + o->mode + "'");
    write_output(b->output, [&](std::ostream& out) {
      out << "mode,station,k,b,alpha_hat,level,empirical,theoretical\n";
      out.precision(17);
      for (const auto& t : tables) {
        const std::string st = t.mode == ss::QqMode::Radial ? "norm" : x.labels()[t.coordinate];
        for (std::size_t i = 0; i < t.levels.size(); ++i) {
          out << ss::to_string(t.mode) << ',' << st << ',' << tail.k << ',' << o->block << ',' << tail.alpha_hat << ','
              << t.levels[i] << ',' << t.empirical[i] << ',' << t.theoretical[i] << '\n';
        }
      }
    });
  });
}

void add_mc_experiment(CLI::App& app) {
  auto* sub = app.add_subcommand("mc-experiment", "Monte Carlo coverage study (CSV plus JSON manifest)");
  auto b = std::make_shared<Binder>(sub);
  auto m = std::make_shared<ModelOptions>();
  auto rp = std::make_shared<ReturnPeriodOptions>();
  auto c = std::make_shared<ss::McConfig>();
  auto methods = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"stable", "pot", "block_maxima"});
  auto rho = std::make_shared<std::string>("large_k");
  auto manifest = std::make_shared<std::string>();
  auto no_uv = std::make_shared<bool>(false);
  m->bind(*b);
  rp->bind(*b);
  b->opt("n", c->n, "path length");
  b->opt("reps", c->n_reps, "replicates");
  b->opt("methods", *methods, "stable, pot, block_maxima");
  b->opt("block-lengths", c->block_lengths, "stable sums lengths");
  b->opt("k-exponent", c->k_exponent, "Hill uses k = n^k_exponent");
  b->opt("R", c->R_bootstrap, "bootstrap replicates");
  b->opt("threshold-quantile", c->threshold_quantile, "threshold quantile for POT, theta and m");
  b->opt("bm-block-length", c->bm_block_length, "block maxima block length");
  b->opt("rho-rule", *rho, "median_to_k or large_k");
  b->opt("workers", c->workers, "worker threads (0: all cores)");
  b->opt("manifest", *manifest, "manifest path (default: <output>.manifest.json)");
  b->flag("no-univariate", *no_uv, "skip the coordinate-only stable sums estimator");
  sub->callback([=] {
    b->apply_config();
    ss::McConfig cfg = *c;
    cfg.model = m->spec();
    cfg.T_years = rp->T_years;
    cfg.obs_per_year = rp->obs_per_year;
    cfg.ci_level = rp->ci_level;
    cfg.seed = b->seed;
    cfg.rho_rule = rho_rule(*rho);
    cfg.univariate_too = !*no_uv;
    cfg.methods.clear();
    for (const auto& s : *methods) cfg.methods.push_back(ss::method_from_string(s));
    const auto summary = ss::run_coverage_study(cfg);
    write_output(b->output, [&](std::ostream& o) {
      o << "method,variant,b,T_years,T_obs,coordinate,truth,n_reps,n_failed,n_accepted,n_covered,coverage,"
           "coverage_all,acceptance_rate,bias,variance,mse,runtime_seconds\n";
      o.precision(10);
      for (const auto& cell : summary.cells) {
        const auto bias = cell.bias(), var = cell.variance(), mse = cell.mse();
        for (std::size_t j = 0; j < cell.truth.size(); ++j) {
          const std::size_t ok = cell.n_reps - cell.n_failed[j];
          const double cov_all =
              ok == 0 ? std::nan("") : static_cast<double>(cell.n_covered[j]) / static_cast<double>(ok);
          o << ss::to_string(cell.method) << ',' << cell.variant << ',' << cell.b << ',' << cell.T_years << ','
            << cell.T_obs << ',' << j + 1 << ',' << cell.truth[j] << ',' << cell.n_reps << ',' << cell.n_failed[j]
            << ',' << cell.n_accepted[j] << ',' << cell.n_covered[j] << ',' << cell.coverage(j) << ',' << cov_all
            << ',' << cell.acceptance_rate(j) << ',' << bias[j] << ',' << var[j] << ',' << mse[j] << ','
            << cell.runtime_seconds << '\n';
        }
      }
    });
    std::string mpath = *manifest;
    if (mpath.empty() && !b->output.empty() && b->output != "-") mpath = b->output + ".manifest.json";
    if (!mpath.empty()) {
      json man = {{"schema_version", ss::kSchemaVersion},
                  {"tool_version", kVersion},
                  {"compiler", __VERSION__},
                  {"config", cfg},
                  {"seed_derivation", "replicate r uses derive_seed({seed, model_id, r})"},
                  {"model_id", ss::detail::model_id(cfg.model)},
                  {"cells", summary.cells.size()}};
      write_json(mpath, man);
    }
  });
}

void add_pipeline(CLI::App& app) {
  auto* sub = app.add_subcommand("pipeline", "case-study analysis as a function of k (JSON report)");
  auto b = std::make_shared<Binder>(sub);
  auto in = std::make_shared<InputOptions>();
  auto rp = std::make_shared<ReturnPeriodOptions>();
  auto c = std::make_shared<ss::io::PipelineConfig>();
  auto policy = std::make_shared<std::string>("paper_min_pvalue");
  auto rho = std::make_shared<std::string>("large_k");
  auto no_classical = std::make_shared<bool>(false);
  in->bind(*b);
  rp->bind(*b);
  b->opt("k-values", c->k_values, "order-statistic counts");
  b->opt("min-block", c->min_block, "only sum lengths above this are chosen");
  b->opt("max-acceptances", c->max_acceptances, "compare only the first this-many acceptances");
  b->opt("threshold-quantile", c->threshold_quantile, "norm quantile for the spatial indexes");
  b->opt("R", c->bootstrap_R, "bootstrap replicates");
  b->opt("policy", *policy, "paper_min_pvalue, max_pvalue or first_accepted");
  b->opt("rho-rule", *rho, "median_to_k or large_k");
  b->opt("max-lag", c->extremogram_max_lag, "extremogram lags");
  b->opt("workers", c->workers, "worker threads (0: all cores)");
  b->flag("no-classical", *no_classical, "skip POT and block maxima");
  sub->callback([=] {
    b->apply_config();
    ss::io::PipelineConfig cfg = *c;
    cfg.T_years = rp->T_years;
    cfg.obs_per_year = rp->obs_per_year;
    cfg.seed = b->seed;
    cfg.policy = ss::block_policy_from_string(*policy);
    cfg.rho_rule = rho_rule(*rho);
    cfg.classical = !*no_classical;
    const auto table = in->load();
    write_json(b->output, ss::io::to_json(ss::io::run_case_study_pipeline(table, cfg)));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme return levels by the stable sums method"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  add_simulate(app);
  add_fit_stable(app);
  add_stable_sums(app);
  add_pot(app);
  add_block_maxima(app);
  add_extremogram(app);
  add_qq(app);
  add_mc_experiment(app);
  add_pipeline(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ss::convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ss::precondition_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
