#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "skewsurge/core_data.hpp"
#include "skewsurge/empirical_body.hpp"

namespace skewsurge {

enum class RateFamily { R0 = 0, R1, R2, R3, R4 };
enum class ScaleFamily { S0 = 0, S1, S2, S3, S4 };
enum class Covariate { none, year, gmt };

std::string_view to_string(RateFamily f);
std::string_view to_string(ScaleFamily f);
RateFamily parse_rate_family(std::string_view s);
ScaleFamily parse_scale_family(std::string_view s);

/// R1/R2 and S1/S2 trend on the standardized year, R3/R4 and S3/S4 on GMT.
Covariate trend_covariate(RateFamily f);
Covariate trend_covariate(ScaleFamily f);
/// Number of trend coefficients: 0, 1 (uniform) or 4 (one per season).
std::size_t trend_count(RateFamily f);
std::size_t trend_count(ScaleFamily f);

inline constexpr double kDaysPerYear = 365.0;

/// Shift to apply on the logit (rate) or metre (scale) scale for the family's trend.
double trend_term(Covariate cov, std::size_t count, const std::vector<double>& deltas, Season season,
                  double year_std, double gmt);

/// sigma = alpha + beta sin(2 pi (d - phase)/365) + gamma x + trend.
struct ScaleParams {
  ScaleFamily family = ScaleFamily::S0;
  double alpha = 0.1;
  double beta = 0.01;
  double phase = 0.0;  // days
  double gamma = 0.0;  // per metre of peak tide
  std::vector<double> deltas;
};

/// Centring constants for the rate model's day-in-month and tide terms.
struct TideStandardizers {
  double tide_mean = 0.0;
  double tide_sd = 1.0;
  std::array<double, 12> mean_day_of_month{};
};

/// Observed tide mean / sample sd and per-month mean day-in-month.
TideStandardizers tide_standardizers(const SiteSeries& series);

/// logit(lambda_out) = logit(lambda) + (d_j - dbar_j) beta_day sin(2 pi (d - phase_day)/365)
///   + ((x - xbar)/s_x)[alpha_tide + beta_tide sin(2 pi (d - phase_tide)/365)] + trend.
struct RateParams {
  RateFamily family = RateFamily::R0;
  double lambda = 0.05;
  double beta_day = 0.0;
  double phase_day = 0.0;
  double alpha_tide = 0.0;
  double beta_tide = 0.0;
  double phase_tide = 0.0;
  std::vector<double> deltas;
  TideStandardizers standardizers;
};

struct TailParams {
  RateParams rate;
  ScaleParams scale;
  double shape = 0.0;
};

/// Covariates of one tidal cycle as seen by the tail model.
struct CycleCovariates {
  int day_of_year = 1;
  int day_of_month = 1;
  int month = 1;
  double tide = 0.0;
  double year_std = 0.0;
  double gmt = 0.0;
};

CycleCovariates covariates_of(const TidalCycleRecord& r);

double logit(double p);
double inv_logit(double t);

/// Evaluated scale; a non-positive value marks an invalid parameter set.
double scale_at(const ScaleParams& sp, int day_of_year, double tide, double year_std, double gmt);
double rate_at(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
               double year_std, double gmt);
double rate_logit_at(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
                     double year_std, double gmt);

inline constexpr double kShapeZeroTol = 1e-8;

/// P(Y > y) = lambda [1 + xi (y-u)/sigma]_+^(-1/xi) for y > u (exponential limit near xi = 0).
double gpd_tail_prob(double y, double threshold, double lambda, double sigma, double xi);
/// log density of a GPD excess; -inf outside the support.
double gpd_log_density(double excess, double sigma, double xi);
double mean_excess(double sigma, double xi);

/// lambda at covariate value b minus lambda at a, other covariates fixed.
double delta_lambda(const RateParams& rp, int day_of_year, int day_of_month, int month, double tide,
                    Covariate covariate, double a, double b);

/// Full skew-surge CDF: body below the monthly threshold, GPD tail above it.
double eval_cdf(double y, const CycleCovariates& c, const TideBandedEmpirical& body, const TailParams& tail);

struct SkewSurgeModel {
  TideBandedEmpirical body;
  TailParams tail;

  double cdf(double y, const CycleCovariates& c) const { return eval_cdf(y, c, body, tail); }
};

}  // namespace skewsurge
