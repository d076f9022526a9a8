#include "skewsurge/json_io.hpp"

#include <cmath>
#include <limits>

namespace skewsurge {

namespace {

std::vector<double> doubles(const Json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number_or_nan(x));
  return v;
}

Json array_of(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

}  // namespace

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json to_json(const MonthlyThresholds& t) {
  return Json{{"percentile", number_or_null(t.percentile)},
              {"u", array_of(std::vector<double>(t.u.begin(), t.u.end()))}};
}

MonthlyThresholds thresholds_from_json(const Json& j) {
  MonthlyThresholds t;
  t.percentile = number_or_nan(j.at("percentile"));
  const auto u = doubles(j.at("u"));
  if (u.size() != 12) throw std::invalid_argument("thresholds need 12 values");
  std::copy(u.begin(), u.end(), t.u.begin());
  return t;
}

Json to_json(const TideStandardizers& s) {
  return Json{{"tide_mean", s.tide_mean},
              {"tide_sd", s.tide_sd},
              {"mean_day_of_month", array_of(std::vector<double>(s.mean_day_of_month.begin(), s.mean_day_of_month.end()))}};
}

TideStandardizers standardizers_from_json(const Json& j) {
  TideStandardizers s;
  s.tide_mean = j.at("tide_mean").get<double>();
  s.tide_sd = j.at("tide_sd").get<double>();
  const auto d = doubles(j.at("mean_day_of_month"));
  if (d.size() != 12) throw std::invalid_argument("mean_day_of_month needs 12 values");
  std::copy(d.begin(), d.end(), s.mean_day_of_month.begin());
  return s;
}

Json to_json(const RateParams& rp) {
  return Json{{"family", to_string(rp.family)},     {"lambda", rp.lambda},
              {"beta_day", rp.beta_day},             {"phase_day", rp.phase_day},
              {"alpha_tide", rp.alpha_tide},         {"beta_tide", rp.beta_tide},
              {"phase_tide", rp.phase_tide},         {"deltas", array_of(rp.deltas)},
              {"standardizers", to_json(rp.standardizers)}};
}

RateParams rate_params_from_json(const Json& j) {
  RateParams rp;
  rp.family = parse_rate_family(j.at("family").get<std::string>());
  rp.lambda = j.at("lambda").get<double>();
  rp.beta_day = j.at("beta_day").get<double>();
  rp.phase_day = j.at("phase_day").get<double>();
  rp.alpha_tide = j.at("alpha_tide").get<double>();
  rp.beta_tide = j.at("beta_tide").get<double>();
  rp.phase_tide = j.at("phase_tide").get<double>();
  if (j.contains("deltas")) rp.deltas = doubles(j.at("deltas"));
  if (j.contains("standardizers")) rp.standardizers = standardizers_from_json(j.at("standardizers"));
  if (rp.deltas.size() != trend_count(rp.family)) throw std::invalid_argument("rate trend coefficient count mismatch");
  return rp;
}

Json to_json(const ScaleParams& sp) {
  return Json{{"family", to_string(sp.family)}, {"alpha", sp.alpha}, {"beta", sp.beta},
              {"phase", sp.phase},               {"gamma", sp.gamma}, {"deltas", array_of(sp.deltas)}};
}

ScaleParams scale_params_from_json(const Json& j) {
  ScaleParams sp;
  sp.family = parse_scale_family(j.at("family").get<std::string>());
  sp.alpha = j.at("alpha").get<double>();
  sp.beta = j.at("beta").get<double>();
  sp.phase = j.at("phase").get<double>();
  sp.gamma = j.value("gamma", 0.0);
  if (j.contains("deltas")) sp.deltas = doubles(j.at("deltas"));
  if (sp.deltas.size() != trend_count(sp.family)) throw std::invalid_argument("scale trend coefficient count mismatch");
  return sp;
}

Json to_json(const TailParams& tp) {
  return Json{{"rate", to_json(tp.rate)}, {"scale", to_json(tp.scale)}, {"shape", tp.shape}};
}

TailParams tail_params_from_json(const Json& j) {
  return TailParams{rate_params_from_json(j.at("rate")), scale_params_from_json(j.at("scale")),
                    j.at("shape").get<double>()};
}

Json to_json(const Scores& s) {
  return Json{{"loglik", s.loglik}, {"k", s.k}, {"n", s.n}, {"aic", s.aic}, {"bic", s.bic}};
}

Json to_json(const ParamEstimate& e) {
  return Json{{"name", e.name},
              {"value", e.value},
              {"se", number_or_null(e.se)},
              {"ci_lower", number_or_null(e.lo)},
              {"ci_upper", number_or_null(e.hi)},
              {"fixed", e.fixed}};
}

Json to_json(const FitResult& fr) {
  Json est = Json::array();
  for (const auto& e : fr.estimates) est.push_back(to_json(e));
  return Json{{"site", fr.site_id},
              {"rate_family", to_string(fr.rate_family)},
              {"scale_family", to_string(fr.scale_family)},
              {"shape_prior", fr.shape_prior},
              {"n_exceedances", fr.n_exceedances},
              {"scores", to_json(fr.scores)},
              {"rate_scores", to_json(fr.rate_scores)},
              {"excess_scores", to_json(fr.excess_scores)},
              {"converged", fr.converged},
              {"iterations", fr.iterations},
              {"hessian_ok", fr.hessian_ok},
              {"message", fr.message},
              {"estimates", std::move(est)},
              {"params", to_json(fr.params)}};
}

Json to_json(const PooledResult& pr) {
  Json shared = Json::array();
  for (const auto& e : pr.shared_estimates) shared.push_back(to_json(e));
  Json sites = Json::array();
  for (const auto& s : pr.sites) sites.push_back(to_json(s));
  Json untied = Json::array();
  for (const auto& s : pr.untied_sites) untied.push_back(to_json(s));
  return Json{{"shared", pr.shared},
              {"shared_estimates", std::move(shared)},
              {"pooled", to_json(pr.pooled)},
              {"untied", to_json(pr.untied)},
              {"converged", pr.converged},
              {"sites", std::move(sites)},
              {"untied_sites", std::move(untied)}};
}

Json to_json(const ExiModel& m) {
  return Json{{"v", number_or_null(m.v)},         {"psi", m.psi},
              {"theta", m.theta},                 {"theta_v", m.theta_v},
              {"run_length", m.run_length},       {"levels", array_of(m.levels)},
              {"runs", array_of(m.runs)},         {"knot_levels", array_of(m.knot_levels)},
              {"knot_runs", array_of(m.knot_runs)}};
}

ExiModel exi_from_json(const Json& j) {
  ExiModel m;
  m.v = j.at("v").is_null() ? -std::numeric_limits<double>::infinity() : j.at("v").get<double>();
  m.psi = j.at("psi").get<double>();
  m.theta = j.at("theta").get<double>();
  m.theta_v = j.at("theta_v").get<double>();
  m.run_length = j.at("run_length").get<int>();
  m.levels = doubles(j.at("levels"));
  m.runs = doubles(j.at("runs"));
  m.knot_levels = doubles(j.at("knot_levels"));
  m.knot_runs = doubles(j.at("knot_runs"));
  return m;
}

Json to_json(const TideBandedEmpirical& body) {
  Json months = Json::array();
  for (int m = 1; m <= 12; ++m) {
    const auto& mb = body.month(m);
    Json bands = Json::array();
    for (const auto& b : mb.bands) bands.push_back(Json{{"total", b.total}, {"sorted", b.sorted}});
    months.push_back(Json{{"month", m},
                          {"tide_q33", mb.tide_q33},
                          {"tide_q67", mb.tide_q67},
                          {"threshold", mb.threshold},
                          {"bands", std::move(bands)}});
  }
  return Json{{"months", std::move(months)}};
}

TideBandedEmpirical empirical_from_json(const Json& j) {
  std::array<MonthBody, 12> months{};
  const auto& arr = j.at("months");
  if (arr.size() != 12) throw std::invalid_argument("empirical body needs 12 months");
  for (std::size_t m = 0; m < 12; ++m) {
    const auto& jm = arr[m];
    months[m].tide_q33 = jm.at("tide_q33").get<double>();
    months[m].tide_q67 = jm.at("tide_q67").get<double>();
    months[m].threshold = jm.at("threshold").get<double>();
    const auto& bands = jm.at("bands");
    if (bands.size() != 3) throw std::invalid_argument("empirical body needs 3 bands per month");
    for (std::size_t b = 0; b < 3; ++b) {
      months[m].bands[b].total = bands[b].at("total").get<std::size_t>();
      months[m].bands[b].sorted = bands[b].at("sorted").get<std::vector<double>>();
    }
  }
  return TideBandedEmpirical(std::move(months));
}

Json to_json(const ReturnCurve& curve) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < curve.p.size(); ++i)
    rows.push_back(Json{{"p", curve.p[i]}, {"return_period_years", 1.0 / curve.p[i]}, {"z_m", curve.z[i]}});
  return rows;
}

Json series_summary(const SiteSeries& series, const MonthlyThresholds& thresholds) {
  std::array<std::size_t, 12> per_month{};
  std::map<int, std::size_t> per_year;
  for (const auto& r : series.records) {
    ++per_month[static_cast<std::size_t>(r.month - 1)];
    ++per_year[r.year];
  }
  Json years = Json::object();
  for (const auto& [y, c] : per_year) years[std::to_string(y)] = c;
  return Json{{"site", series.site_id},
              {"records", series.records.size()},
              {"first", series.records.empty() ? "" : format_timestamp(series.records.front().timestamp)},
              {"last", series.records.empty() ? "" : format_timestamp(series.records.back().timestamp)},
              {"msl_trend_rate_mm_per_year", series.msl_trend_rate},
              {"reference_year", series.reference_year},
              {"records_per_month", per_month},
              {"records_per_year", std::move(years)},
              {"thresholds", to_json(thresholds)}};
}

}  // namespace skewsurge
