#include "skewsurge/gpd_tail.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

namespace {

constexpr double kTwoPiOverYear = 2.0 * std::numbers::pi / kDaysPerYear;

double covariate_value(Covariate cov, double year_std, double gmt) {
  switch (cov) {
    case Covariate::none: return 0.0;
    case Covariate::year: return year_std;
    case Covariate::gmt: return gmt;
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(RateFamily f) {
  static constexpr std::array<std::string_view, 5> names = {"R0", "R1", "R2", "R3", "R4"};
  return names[static_cast<std::size_t>(f)];
}

std::string_view to_string(ScaleFamily f) {
  static constexpr std::array<std::string_view, 5> names = {"S0", "S1", "S2", "S3", "S4"};
  return names[static_cast<std::size_t>(f)];
}

RateFamily parse_rate_family(std::string_view s) {
  for (int i = 0; i < 5; ++i)
    if (s == to_string(static_cast<RateFamily>(i))) return static_cast<RateFamily>(i);
  throw std::invalid_argument(fmt::format("unknown rate family '{}' (expected R0..R4)", s));
}

ScaleFamily parse_scale_family(std::string_view s) {
  for (int i = 0; i < 5; ++i)
    if (s == to_string(static_cast<ScaleFamily>(i))) return static_cast<ScaleFamily>(i);
  throw std::invalid_argument(fmt::format("unknown scale family '{}' (expected S0..S4)", s));
}

Covariate trend_covariate(RateFamily f) {
  switch (f) {
    case RateFamily::R0: return Covariate::none;
    case RateFamily::R1: case RateFamily::R2: return Covariate::year;
    case RateFamily::R3: case RateFamily::R4: return Covariate::gmt;
  }
  return Covariate::none;
}

Covariate trend_covariate(ScaleFamily f) {
  switch (f) {
    case ScaleFamily::S0: return Covariate::none;
    case ScaleFamily::S1: case ScaleFamily::S2: return Covariate::year;
    case ScaleFamily::S3: case ScaleFamily::S4: return Covariate::gmt;
  }
  return Covariate::none;
}

std::size_t trend_count(RateFamily f) {
  switch (f) {
    case RateFamily::R0: return 0;
    case RateFamily::R1: case RateFamily::R3: return 1;
    case RateFamily::R2: case RateFamily::R4: return 4;
  }
  return 0;
}

std::size_t trend_count(ScaleFamily f) {
  switch (f) {
    case ScaleFamily::S0: return 0;
    case ScaleFamily::S1: case ScaleFamily::S3: return 1;
    case ScaleFamily::S2: case ScaleFamily::S4: return 4;
  }
  return 0;
}

double trend_term(Covariate cov, std::size_t count, const std::vector<double>& deltas, Season season,
                  double year_std, double gmt) {
  if (count == 0) return 0.0;
  if (deltas.size() != count)
    throw std::invalid_argument(fmt::format("expected {} trend coefficients, got {}", count, deltas.size()));
  const double value = covariate_value(cov, year_std, gmt);
  if (!std::isfinite(value))
    throw std::invalid_argument(cov == Covariate::year ? "standardized year covariate missing"
                                                       : "GMT covariate missing");
  const double delta = count == 1 ? deltas[0] : deltas[static_cast<std::size_t>(season)];
  return delta * value;
}

TideStandardizers tide_standardizers(const SiteSeries& series) {
  if (series.records.size() < 2) throw DataError("need at least two cycles for tide standardizers");
  TideStandardizers s;
  double sum = 0.0;
  for (const auto& r : series.records) sum += r.peak_tide;
  const double n = static_cast<double>(series.records.size());
  s.tide_mean = sum / n;
  double ss = 0.0;
  for (const auto& r : series.records) ss += (r.peak_tide - s.tide_mean) * (r.peak_tide - s.tide_mean);
  s.tide_sd = std::sqrt(ss / (n - 1.0));

  std::array<double, 12> day_sum{};
  std::array<std::size_t, 12> count{};
  for (const auto& r : series.records) {
    const auto m = static_cast<std::size_t>(r.month - 1);
    day_sum[m] += r.day_of_month;
    ++count[m];
  }
  static constexpr std::array<int, 12> kLength = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  for (std::size_t m = 0; m < 12; ++m)
    s.mean_day_of_month[m] = count[m] > 0 ? day_sum[m] / static_cast<double>(count[m])
                                          : (kLength[m] + 1) / 2.0;
  return s;
}

CycleCovariates covariates_of(const TidalCycleRecord& r) {
  return CycleCovariates{r.day_of_year, r.day_of_month, r.month, r.peak_tide, r.year_std, r.gmt};
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error(fmt::format("logit of {} outside (0,1)", p));
  return std::log(p / (1.0 - p));
}

double inv_logit(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double scale_at(const ScaleParams& sp, int day_of_year, double tide, double year_std, double gmt) {
  const double harmonic = std::sin(kTwoPiOverYear * (day_of_year - sp.phase));
  const Season season = season_of_month(month_of_day_of_year(day_of_year));
  return sp.alpha + sp.beta * harmonic + sp.gamma * tide +
         trend_term(trend_covariate(sp.family), trend_count(sp.family), sp.deltas, season, year_std, gmt);
}

double rate_logit_at(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
                     double year_std, double gmt) {
  if (!(rp.standardizers.tide_sd > 0.0)) throw std::domain_error("tide standard deviation must be positive");
  const auto& st = rp.standardizers;
  const double day_term = (day_of_month - st.mean_day_of_month.at(static_cast<std::size_t>(month - 1))) *
                          rp.beta_day * std::sin(kTwoPiOverYear * (day_of_year - rp.phase_day));
  const double tide_std = (tide - st.tide_mean) / st.tide_sd;
  const double tide_term =
      tide_std * (rp.alpha_tide + rp.beta_tide * std::sin(kTwoPiOverYear * (day_of_year - rp.phase_tide)));
  return logit(rp.lambda) + day_term + tide_term +
         trend_term(trend_covariate(rp.family), trend_count(rp.family), rp.deltas, season_of_month(month),
                    year_std, gmt);
}

double rate_at(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
               double year_std, double gmt) {
  return inv_logit(rate_logit_at(rp, day_of_year, day_of_month, month, tide, year_std, gmt));
}

double gpd_tail_prob(double y, double threshold, double lambda, double sigma, double xi) {
  if (!(sigma > 0.0)) throw std::domain_error(fmt::format("GPD scale {} must be positive", sigma));
  if (y < threshold) throw std::domain_error("tail probability requested below the threshold");
  const double z = (y - threshold) / sigma;
  if (std::abs(xi) < kShapeZeroTol) return lambda * std::exp(-z);
  const double t = xi * z;
  if (t <= -1.0) return 0.0;
  return lambda * std::exp(-std::log1p(t) / xi);
}

double gpd_log_density(double excess, double sigma, double xi) {
  if (!(sigma > 0.0) || excess < 0.0) return -std::numeric_limits<double>::infinity();
  const double z = excess / sigma;
  if (std::abs(xi) < kShapeZeroTol) return -std::log(sigma) - z;
  const double t = xi * z;
  if (t <= -1.0) return -std::numeric_limits<double>::infinity();
  return -std::log(sigma) - (1.0 + 1.0 / xi) * std::log1p(t);
}

double mean_excess(double sigma, double xi) {
  if (!(xi < 1.0)) throw std::domain_error("mean excess is infinite for shape >= 1");
  if (!(sigma > 0.0)) throw std::domain_error("GPD scale must be positive");
  return sigma / (1.0 - xi);
}

double delta_lambda(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
                    Covariate covariate, double a, double b) {
  if (covariate == Covariate::none || trend_covariate(rp.family) != covariate)
    throw std::invalid_argument(fmt::format("rate family {} has no {} trend", to_string(rp.family),
                                            covariate == Covariate::gmt ? "GMT" : "year"));
  const auto at = [&](double v) {
    return covariate == Covariate::year ? rate_at(rp, day_of_year, day_of_month, month, tide, v, 0.0)
                                        : rate_at(rp, day_of_year, day_of_month, month, tide, 0.0, v);
  };
  return at(b) - at(a);
}

double eval_cdf(double y, const CycleCovariates& c, const TideBandedEmpirical& body, const TailParams& tail) {
  const double u = body.threshold(c.month);
  if (y <= u) return body.cdf(y, c.month, c.tide);
  const double lambda = rate_at(tail.rate, c.day_of_year, c.day_of_month, c.month, c.tide, c.year_std, c.gmt);
  const double sigma = scale_at(tail.scale, c.day_of_year, c.tide, c.year_std, c.gmt);
  return 1.0 - gpd_tail_prob(y, u, lambda, sigma, tail.shape);
}

}  // namespace skewsurge
