#include "skewsurge/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "skewsurge/config.hpp"
#include "skewsurge/core_data.hpp"
#include "skewsurge/dependence.hpp"
#include "skewsurge/empirical_body.hpp"
#include "skewsurge/extremal_index.hpp"
#include "skewsurge/inference.hpp"
#include "skewsurge/json_io.hpp"
#include "skewsurge/likelihood.hpp"
#include "skewsurge/return_levels.hpp"
#include "skewsurge/simulate.hpp"

namespace skewsurge {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_path;
  std::string site;
  std::string rate_family;
  std::string scale_family;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> percentile;
  std::optional<int> run_length;
};

struct Prepared {
  SiteSeries series;
  MonthlyThresholds thresholds;
  TideBandedEmpirical body;
  TailData data;
};

class Runner {
 public:
  explicit Runner(RunConfig cfg) : cfg_(std::move(cfg)), hash_(cfg_.hash()) {
    out_dir_ = cfg_.resolve(cfg_.output_dir);
  }

  int run(const std::string& cmd) {
    fs::create_directories(out_dir_);
    if (cmd == "ingest") return ingest();
    if (cmd == "fit") return fit();
    if (cmd == "select") return select();
    if (cmd == "exi") return exi();
    if (cmd == "rl") return rl();
    if (cmd == "dep") return dep();
    if (cmd == "pool") return pool();
    if (cmd == "simulate") return simulate();
    throw std::invalid_argument(fmt::format("unknown subcommand '{}'", cmd));
  }

 private:
  RunConfig cfg_;
  std::string hash_;
  fs::path out_dir_;
  std::optional<std::map<std::string, SiteSeries>> sites_;
  std::optional<GmtSeries> gmt_;
  bool gmt_loaded_ = false;

  Json meta() const {
    return Json{{"tool", "skewsurge"}, {"version", std::string(tool_version())}, {"config_hash", hash_}};
  }

  void write_json(const std::string& name, Json body) const {
    Json doc;
    doc["meta"] = meta();
    for (auto& [k, v] : body.items()) doc[k] = std::move(v);
    write_file(name, doc.dump(2) + "\n");
  }

  void write_csv(const std::string& name, const std::string& table) const {
    write_file(name, fmt::format("# tool=skewsurge version={} config_hash={}\n{}", tool_version(), hash_, table));
  }

  void write_file(const std::string& name, const std::string& content) const {
    const fs::path p = out_dir_ / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
    os << content;
    spdlog::info("wrote {}", p.string());
  }

  const std::map<std::string, SiteSeries>& all_sites() {
    if (!sites_) {
      if (cfg_.gauge_csv.empty()) throw std::invalid_argument("config has no gauge_csv");
      sites_ = load_sites(cfg_.resolve(cfg_.gauge_csv));
    }
    return *sites_;
  }

  const std::optional<GmtSeries>& gmt() {
    if (!gmt_loaded_) {
      if (cfg_.gmt_csv) gmt_ = GmtSeries::load(cfg_.resolve(*cfg_.gmt_csv));
      gmt_loaded_ = true;
    }
    return gmt_;
  }

  std::vector<std::string> site_names(const std::vector<std::string>& requested) {
    const auto& all = all_sites();
    std::vector<std::string> names = requested.empty() ? cfg_.sites : requested;
    if (names.empty())
      for (const auto& [name, s] : all) names.push_back(name);
    for (const auto& n : names)
      if (!all.contains(n)) throw std::invalid_argument(fmt::format("site '{}' not found in {}", n, cfg_.gauge_csv.string()));
    return names;
  }

  Prepared prepare(const std::string& site) {
    SiteSeries s = all_sites().at(site);
    const auto rate = cfg_.detrend_mm_per_year.find(site);
    if (rate != cfg_.detrend_mm_per_year.end()) s = detrend_msl(std::move(s), rate->second, cfg_.reference_year);
    s.reference_year = cfg_.reference_year;
    s = gmt() ? attach_covariates(std::move(s), *gmt(), cfg_.year_scale) : attach_covariates(std::move(s), cfg_.year_scale);
    Prepared p{std::move(s), {}, {}, {}};
    p.thresholds = monthly_thresholds(p.series, cfg_.percentile);
    p.body = build_empirical(p.series, p.thresholds);
    p.data = make_tail_data(p.series, p.thresholds);
    return p;
  }

  FitConfig fit_config(RateFamily rf, ScaleFamily sf) const {
    FitConfig fc;
    fc.rate_family = rf;
    fc.scale_family = sf;
    fc.optim.grad_tol = cfg_.grad_tol;
    fc.optim.step_tol = cfg_.step_tol;
    fc.optim.max_iter = cfg_.max_iter;
    fc.starts = cfg_.starts;
    fc.use_shape_prior = cfg_.shape_prior;
    fc.run_length = cfg_.run_length;
    fc.seed = cfg_.seed;
    return fc;
  }

  std::string fit_name(const std::string& site) const {
    return fmt::format("fit_{}_{}_{}.json", site, to_string(cfg_.rate_family), to_string(cfg_.scale_family));
  }

  // A fit artifact from an earlier `fit` run with the same families is reused; otherwise fit now.
  TailParams fitted_params(const std::string& site, const Prepared& p) {
    const fs::path path = out_dir_ / fit_name(site);
    if (fs::exists(path)) {
      std::ifstream in(path);
      const Json j = Json::parse(in);
      spdlog::info("using fitted parameters from {}", path.string());
      return tail_params_from_json(j.at("fit").at("params"));
    }
    return fit_tail(p.data, fit_config(cfg_.rate_family, cfg_.scale_family)).params;
  }

  ExiModel exi_model(const std::string& site, const Prepared& p) {
    const fs::path path = out_dir_ / fmt::format("exi_{}.json", site);
    if (fs::exists(path)) {
      std::ifstream in(path);
      return exi_from_json(Json::parse(in).at("exi"));
    }
    return fit_exi(p);
  }

  ExiModel fit_exi(const Prepared& p) const {
    std::vector<double> y;
    y.reserve(p.series.records.size());
    for (const auto& r : p.series.records) y.push_back(r.skew_surge);
    const double v = quantile(y, 0.99);
    return fit_exi_curve(y, v, cfg_.run_length, default_level_grid(y, cfg_.exi_levels));
  }

  int ingest() {
    for (const auto& site : site_names({})) {
      const Prepared p = prepare(site);
      write_json(fmt::format("ingest_{}.json", site), Json{{"summary", series_summary(p.series, p.thresholds)},
                                                          {"exceedances", p.data.n_exceedances()}});
      write_json(fmt::format("body_{}.json", site), Json{{"body", to_json(p.body)}});
    }
    return 0;
  }

  int fit() {
    for (const auto& site : site_names({})) {
      const Prepared p = prepare(site);
      spdlog::info("fitting {} with {}/{}", site, to_string(cfg_.rate_family), to_string(cfg_.scale_family));
      const FitResult fr = fit_tail(p.data, fit_config(cfg_.rate_family, cfg_.scale_family));
      write_json(fit_name(site), Json{{"fit", to_json(fr)}});
    }
    return 0;
  }

  int select() {
    for (const auto& site : site_names({})) {
      const Prepared p = prepare(site);
      std::vector<RateFamily> rfs = cfg_.rate_families;
      std::vector<ScaleFamily> sfs = cfg_.scale_families;
      if (rfs.empty()) {
        rfs = {RateFamily::R0, RateFamily::R1, RateFamily::R2};
        if (p.data.has_gmt) rfs.insert(rfs.end(), {RateFamily::R3, RateFamily::R4});
      }
      if (sfs.empty()) {
        sfs = {ScaleFamily::S0, ScaleFamily::S1, ScaleFamily::S2};
        if (p.data.has_gmt) sfs.insert(sfs.end(), {ScaleFamily::S3, ScaleFamily::S4});
      }
      // The rate and excess parts of the likelihood are separable, so each table varies one block.
      std::vector<std::pair<std::string, Scores>> rate_rows, scale_rows;
      for (auto rf : rfs)
        rate_rows.emplace_back(to_string(rf), fit_tail(p.data, fit_config(rf, ScaleFamily::S0)).rate_scores);
      for (auto sf : sfs)
        scale_rows.emplace_back(to_string(sf), fit_tail(p.data, fit_config(RateFamily::R0, sf)).excess_scores);

      Json doc = Json::object();
      const auto table = [&](const std::vector<std::pair<std::string, Scores>>& rows, const char* key) {
        std::size_t best_aic = 0, best_bic = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
          if (rows[i].second.aic < rows[best_aic].second.aic) best_aic = i;
          if (rows[i].second.bic < rows[best_bic].second.bic) best_bic = i;
        }
        std::string csv = "family,k,n,loglik,aic,bic,min_aic,min_bic\n";
        Json arr = Json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto& [fam, s] = rows[i];
          csv += fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{},{}\n", fam, s.k, s.n, s.loglik, s.aic, s.bic,
                             i == best_aic ? 1 : 0, i == best_bic ? 1 : 0);
          Json row = to_json(s);
          row["family"] = fam;
          row["min_aic"] = i == best_aic;
          row["min_bic"] = i == best_bic;
          arr.push_back(std::move(row));
        }
        doc[key] = std::move(arr);
        return csv;
      };
      write_csv(fmt::format("select_{}_rate.csv", site), table(rate_rows, "rate"));
      write_csv(fmt::format("select_{}_scale.csv", site), table(scale_rows, "scale"));
      write_json(fmt::format("select_{}.json", site), doc);
    }
    return 0;
  }

  int exi() {
    for (const auto& site : site_names({})) {
      const Prepared p = prepare(site);
      write_json(fmt::format("exi_{}.json", site), Json{{"exi", to_json(fit_exi(p))}});
    }
    return 0;
  }

  CovariateScenario scenario() {
    const double year = cfg_.scenario_year.value_or(cfg_.reference_year);
    CovariateScenario sc;
    sc.year_std = standardize_year(year, cfg_.year_scale);
    if (cfg_.scenario_gmt)
      sc.gmt = *cfg_.scenario_gmt;
    else if (gmt() && gmt()->contains(static_cast<int>(year)))
      sc.gmt = gmt()->at(static_cast<int>(year));
    return sc;
  }

  int rl() {
    for (const auto& site : site_names({})) {
      const Prepared p = prepare(site);
      const SkewSurgeModel model{p.body, fitted_params(site, p)};
      const ExiModel ex = exi_model(site, p);
      const TideSampleCalendar cal = build_calendar(p.series);
      const CovariateScenario sc = scenario();
      const ReturnCurve curve = return_curve(cfg_.p_grid, model, ex, cal, sc);
      std::ostringstream csv;
      write_return_curve_csv(csv, curve);
      write_csv(fmt::format("rl_{}.csv", site), csv.str());
      write_json(fmt::format("rl_{}.json", site),
                 Json{{"site", site},
                      {"scenario", {{"year_std", sc.year_std}, {"gmt", sc.gmt}}},
                      {"years_in_calendar", cal.n_years()},
                      {"curve", to_json(curve)}});
    }
    return 0;
  }

  int dep() {
    const auto names = site_names({});
    if (names.size() < 2) throw std::invalid_argument("dep needs at least two sites");
    std::map<std::string, Prepared> prepared;
    std::map<std::string, std::vector<DailyValue>> raw, uniform;
    for (const auto& site : names) {
      Prepared p = prepare(site);
      raw[site] = daily_maxima(p.series);
      const SkewSurgeModel model{p.body, fitted_params(site, p)};
      uniform[site] = daily_maxima(p.series, pit_transform(p.series, model));
    }
    std::vector<DependenceRow> rows;
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        const std::string pair = names[i] + "-" + names[j];
        for (int lag : cfg_.lags)
          for (const auto* margin : {"raw", "uniform"}) {
            const auto& src = std::string(margin) == "raw" ? raw : uniform;
            rows.push_back(dependence_row(pair, margin, daily_max_pairs(src.at(names[i]), src.at(names[j]), lag),
                                          cfg_.dependence_p));
          }
      }
    std::ostringstream csv;
    write_dependence_csv(csv, rows);
    write_csv("dependence.csv", csv.str());
    return 0;
  }

  int pool() {
    const auto names = site_names(cfg_.pool_sites);
    std::vector<Prepared> prepared;
    for (const auto& site : names) prepared.push_back(prepare(site));
    std::vector<const TailData*> data;
    for (const auto& p : prepared) data.push_back(&p.data);
    const PooledResult pr = fit_pooled(data, cfg_.pool_shared, fit_config(cfg_.rate_family, cfg_.scale_family));
    write_json("pool.json", Json{{"pool", to_json(pr)}});
    return 0;
  }

  int simulate() {
    const Json& js = cfg_.simulate;
    SimSpec spec;
    spec.site_id = js.value("site", std::string("SIM"));
    if (js.contains("start")) spec.start = parse_timestamp(js.at("start").get<std::string>());
    spec.n_cycles = js.value("n_cycles", spec.n_cycles);
    spec.cycle_hours = js.value("cycle_hours", spec.cycle_hours);
    if (js.contains("tide")) {
      const auto& t = js.at("tide");
      spec.tide_mean = t.value("mean", spec.tide_mean);
      spec.tide_amplitude = t.value("amplitude", spec.tide_amplitude);
      spec.spring_neap_days = t.value("spring_neap_days", spec.spring_neap_days);
    }
    if (js.contains("body")) {
      spec.body_mean = js.at("body").value("mean", spec.body_mean);
      spec.body_sd = js.at("body").value("sd", spec.body_sd);
    }
    if (!js.contains("thresholds") || !js.contains("params"))
      throw std::invalid_argument("simulate section needs 'thresholds' (12 values) and 'params'");
    const auto u = js.at("thresholds").get<std::vector<double>>();
    if (u.size() != 12) throw std::invalid_argument("simulate.thresholds needs 12 values");
    std::copy(u.begin(), u.end(), spec.thresholds.u.begin());
    const TailParams tp = tail_params_from_json(js.at("params"));
    spec.rate = tp.rate;
    spec.scale = tp.scale;
    spec.shape = tp.shape;
    if (js.contains("gmt_path")) {
      const auto& g = js.at("gmt_path");
      std::map<int, double> m;
      const int first = g.at("first_year").get<int>(), last = g.at("last_year").get<int>();
      for (int y = first; y <= last; ++y) m[y] = g.at("start").get<double>() + g.at("slope_per_year").get<double>() * (y - first);
      spec.gmt = GmtSeries(std::move(m));
    } else if (gmt()) {
      spec.gmt = *gmt();
    }
    spec.year_scale = cfg_.year_scale;
    spec.seed = cfg_.seed;

    const SimOutput sim = simulate_series(spec);
    std::ostringstream csv;
    write_series_csv(csv, sim.series);
    write_csv(fmt::format("{}.csv", spec.site_id), csv.str());
    if (js.contains("gmt_path")) {
      std::ostringstream g;
      spec.gmt->write_csv(g);
      write_csv("gmt.csv", g.str());
    }
    std::size_t exceed = 0;
    for (bool e : sim.exceed) exceed += e ? 1 : 0;
    write_json(fmt::format("simulate_{}.json", spec.site_id),
               Json{{"site", spec.site_id}, {"cycles", spec.n_cycles}, {"exceedances", exceed},
                    {"truth", to_json(sim.truth)}});
    return 0;
  }
};

void configure_logging() {
  auto logger = spdlog::get("skewsurge");
  if (!logger) {
    logger = spdlog::stderr_color_mt("skewsurge");
    spdlog::set_default_logger(logger);
  }
  const char* level = std::getenv("SKEWSURGE_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace

std::string_view tool_version() { return SKEWSURGE_VERSION; }

int run_cli(int argc, const char* const* argv) {
  configure_logging();
  CLI::App app{"Non-stationary skew-surge extreme value analysis", "skewsurge"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  app.add_option("--config", ov.config_path, "JSON configuration file");
  app.add_option("--site", ov.site, "Restrict to one site");
  app.add_option("--rate-family", ov.rate_family, "Rate model family R0..R4");
  app.add_option("--scale-family", ov.scale_family, "Scale model family S0..S4");
  app.add_option("--out", ov.out, "Output directory");
  app.add_option("--seed", ov.seed, "Random seed");
  app.add_option("--percentile", ov.percentile, "Monthly threshold percentile");
  app.add_option("--run-length", ov.run_length, "Runs-declustering run length in tidal cycles");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ingest", "Load, detrend and summarize gauge records"},
      {"fit", "Fit the tail model per site"},
      {"select", "AIC/BIC tables across model families"},
      {"exi", "Fit the extremal index curve"},
      {"rl", "Return-level curves"},
      {"dep", "Pairwise extremal dependence table"},
      {"pool", "Pooled multi-site fit"},
      {"simulate", "Generate a synthetic gauge file"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = ov.config_path.empty() ? RunConfig{} : load_config(ov.config_path);
    if (!ov.site.empty()) cfg.sites = {ov.site};
    if (!ov.rate_family.empty()) cfg.rate_family = parse_rate_family(ov.rate_family);
    if (!ov.scale_family.empty()) cfg.scale_family = parse_scale_family(ov.scale_family);
    if (!ov.out.empty()) cfg.output_dir = fs::absolute(ov.out);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.percentile) cfg.percentile = *ov.percentile;
    if (ov.run_length) cfg.run_length = *ov.run_length;
    cfg.validate();
    Runner runner(std::move(cfg));
    return runner.run(app.get_subcommands().front()->get_name());
  } catch (const std::exception& e) {
    std::cerr << "skewsurge: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace skewsurge
