#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skewsurge/core_data.hpp"
#include "skewsurge/gpd_tail.hpp"

namespace skewsurge {

struct SimSpec {
  std::string site_id = "SIM";
  Timestamp start = parse_timestamp("1950-01-01T00:00Z");
  std::size_t n_cycles = 50000;
  double cycle_hours = 12.4206;  // semidiurnal tidal cycle

  /// Synthetic tide X = mean + amplitude cos(2 pi t / spring_neap_days), t in days from start.
  double tide_mean = 3.0;
  double tide_amplitude = 1.5;
  double spring_neap_days = 14.77;
  /// When nonempty, peak tides are taken cyclically from this sample instead.
  std::vector<double> tide_sample;

  /// Body: Normal(body_mean, body_sd) truncated above at u_j.
  double body_mean = 0.0;
  double body_sd = 0.1;

  /// Rate standardizers are recomputed from the generated tides and calendar.
  RateParams rate;
  ScaleParams scale;
  double shape = 0.0;
  MonthlyThresholds thresholds;

  /// GMT anomaly by year; needed for R3/R4/S3/S4.
  std::optional<GmtSeries> gmt;
  YearScale year_scale{};
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimOutput {
  SiteSeries series;        // covariates attached
  TailParams truth;         // with the standardizers actually used
  std::vector<bool> exceed; // per cycle
};

SimOutput simulate_series(const SimSpec& spec);

/// GPD excess by inversion of the distribution function at u in (0,1).
double gpd_quantile(double u, double sigma, double xi);

}  // namespace skewsurge
