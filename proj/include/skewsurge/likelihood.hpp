#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewsurge/core_data.hpp"
#include "skewsurge/gpd_tail.hpp"
#include "skewsurge/parallel.hpp"

namespace skewsurge {

/// Normal penalty on the GPD shape, N(0.0119, 0.0343).
struct ShapePrior {
  double mean = 0.0119;
  double variance = 0.0343;

  double neg_log_density(double xi) const;
  double neg_log_density_derivative(double xi) const { return (xi - mean) / variance; }
};

/// Column-oriented view of one site's cycles, prepared for repeated likelihood evaluation.
struct TailData {
  std::string site_id;
  MonthlyThresholds thresholds;
  TideStandardizers standardizers;

  // One entry per cycle.
  std::vector<double> sin_day;  // sin(2 pi d / 365)
  std::vector<double> cos_day;
  std::vector<std::uint8_t> month;         // 1..12
  std::vector<std::uint8_t> day_of_month;  // 1..31
  std::vector<std::uint8_t> season;        // Season as integer
  std::vector<double> tide;
  std::vector<double> year_std;
  std::vector<double> gmt;
  std::vector<std::uint8_t> exceed;

  // One entry per exceedance (index into the cycle arrays, and y - u_j).
  std::vector<std::uint32_t> exceed_index;
  std::vector<double> excess;

  bool has_year = false;
  bool has_gmt = false;

  std::size_t n_cycles() const { return sin_day.size(); }
  std::size_t n_exceedances() const { return exceed_index.size(); }
};

TailData make_tail_data(const SiteSeries& series, const MonthlyThresholds& thresholds);

/// Layout of the rate block vector:
/// [lambda, beta_day, phase_day, alpha_tide, beta_tide, phase_tide, deltas...].
inline constexpr std::size_t kRateBaseCount = 6;
/// Layout of the excess block vector: [alpha, beta, phase, gamma, deltas..., shape].
inline constexpr std::size_t kScaleBaseCount = 4;

/// Bernoulli part: -sum_i [I_i log lambda_i + (1 - I_i) log(1 - lambda_i)].
/// Returns +inf for parameters outside lambda in (0,1), beta_day > 0, beta_tide > 0.
/// A non-empty `grad` (rate-block length) receives the gradient.
double rate_nll(const RateParams& rp, const TailData& data, Exec exec = Exec::parallel,
                std::span<double> grad = {});

/// GPD part over exceedances: -sum log h(excess; sigma_i, xi), plus the shape-prior
/// penalty when `prior` is set. Returns +inf when alpha > beta > 0 fails, any sigma_i <= 0,
/// or an excess falls outside the support. A non-empty `grad` (excess-block length)
/// receives the gradient.
double excess_nll(const ScaleParams& sp, double xi, const TailData& data,
                  const std::optional<ShapePrior>& prior = std::nullopt, Exec exec = Exec::parallel,
                  std::span<double> grad = {});

/// Full negative log-likelihood (both parts, plus the prior penalty when set).
double neg_loglik(const TailParams& params, const TailData& data,
                  const std::optional<ShapePrior>& prior = std::nullopt, Exec exec = Exec::parallel);

void require_covariates(const TailData& data, RateFamily rf, ScaleFamily sf);

}  // namespace skewsurge
