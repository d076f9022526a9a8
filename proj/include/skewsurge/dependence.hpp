#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewsurge/core_data.hpp"
#include "skewsurge/gpd_tail.hpp"

namespace skewsurge {

using Day = std::chrono::sys_days;

/// Daily maxima of two sites aligned at a lag: A's day t is paired with B's day t + lag.
struct PairedDailySeries {
  int lag = 0;
  std::vector<Day> dates;  // A's calendar day
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const { return a.size(); }
};

struct DailyValue {
  Day day;
  double value;
};

/// Per-UTC-day maximum of `values` (parallel to the series records).
std::vector<DailyValue> daily_maxima(const SiteSeries& series, std::span<const double> values);
std::vector<DailyValue> daily_maxima(const SiteSeries& series);

PairedDailySeries daily_max_pairs(const std::vector<DailyValue>& a, const std::vector<DailyValue>& b, int lag);
PairedDailySeries daily_max_pairs(const SiteSeries& a, const SiteSeries& b, int lag);

/// Kendall's tau-b, O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct ChiEstimate {
  std::size_t n = 0;
  double p = 0.05;
  std::size_t marginal = 0;  // count of A above its (1 - p) quantile
  std::size_t joint = 0;     // count of both above their quantiles
  double chi = 0.0;
  std::optional<double> chibar;  // undefined without joint exceedances
};

/// Empirical chi and chi-bar at the (1 - p) marginal quantiles.
ChiEstimate chi_chibar(std::span<const double> a, std::span<const double> b, double p = 0.05);

/// Each record's skew surge through the fitted model CDF.
std::vector<double> pit_transform(const SiteSeries& series, const SkewSurgeModel& model);

struct DependenceRow {
  std::string pair;
  int lag = 0;
  std::string margin;  // raw or uniform
  std::size_t n = 0;
  double tau = 0.0;
  ChiEstimate chi;
};

DependenceRow dependence_row(const std::string& pair, const std::string& margin, const PairedDailySeries& pairs,
                             double p);

/// Columns pair,lag,margin,n,tau,chi,chibar; undefined chi-bar is written as NA.
void write_dependence_csv(std::ostream& os, const std::vector<DependenceRow>& rows);

}  // namespace skewsurge
