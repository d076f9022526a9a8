#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "skewsurge/core_data.hpp"
#include "skewsurge/extremal_index.hpp"
#include "skewsurge/gpd_tail.hpp"
#include "skewsurge/parallel.hpp"

namespace skewsurge {

struct CalendarCycle {
  double tide = 0.0;
  int day_of_year = 1;
  int day_of_month = 1;
  int month = 1;
};

/// Sequential peak tides of each sample year.
struct TideSampleCalendar {
  std::vector<int> years;
  std::vector<std::vector<CalendarCycle>> cycles;  // one entry per year

  std::size_t n_years() const { return cycles.size(); }
  double min_tide() const;
  double max_tide() const;
};

/// Calendar from the years of `series` that have cycles in all twelve months.
TideSampleCalendar build_calendar(const SiteSeries& series);

/// Long-term covariates held fixed while evaluating the annual-maximum distribution.
struct CovariateScenario {
  double year_std = 0.0;
  double gmt = 0.0;
};

using CycleCdf = std::function<double(double surge, const CalendarCycle& cycle)>;
using ThetaFn = std::function<double(double surge)>;
using LevelCdf = std::function<double(double z)>;

/// F^theta, the per-cycle contribution to the annual-maximum product.
double powered_cdf(double f, double theta);

/// (1/K) sum_k prod_cycles F(z - x)^theta(z - x), accumulated in log space per year.
double annual_max_cdf(double z, const TideSampleCalendar& calendar, const CycleCdf& cdf, const ThetaFn& theta,
                      Exec exec = Exec::parallel);
double annual_max_cdf(double z, const SkewSurgeModel& model, const ExiModel& exi, const TideSampleCalendar& calendar,
                      const CovariateScenario& scenario, Exec exec = Exec::parallel);

struct RootOptions {
  double tolerance = 1e-6;  // in probability
  int max_iter = 200;
};

/// Level z with cdf(z) = 1 - p, by bisection on [lo, hi].
double return_level(double p, const LevelCdf& cdf, double lo, double hi, const RootOptions& opts = {});
/// Bracket [min tide - 1, max tide + 10].
double return_level(double p, const SkewSurgeModel& model, const ExiModel& exi, const TideSampleCalendar& calendar,
                    const CovariateScenario& scenario, const RootOptions& opts = {}, Exec exec = Exec::parallel);

struct ReturnCurve {
  std::vector<double> p;
  std::vector<double> z;
};

ReturnCurve return_curve(std::span<const double> ps, const LevelCdf& cdf, double lo, double hi,
                         const RootOptions& opts = {}, Exec exec = Exec::parallel);
ReturnCurve return_curve(std::span<const double> ps, const SkewSurgeModel& model, const ExiModel& exi,
                         const TideSampleCalendar& calendar, const CovariateScenario& scenario,
                         const RootOptions& opts = {}, Exec exec = Exec::parallel);

/// Columns p,return_period_years,z_m.
void write_return_curve_csv(std::ostream& os, const ReturnCurve& curve);

}  // namespace skewsurge
