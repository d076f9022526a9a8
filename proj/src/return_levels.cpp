#include "skewsurge/return_levels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

double TideSampleCalendar::min_tide() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& year : cycles)
    for (const auto& c : year) m = std::min(m, c.tide);
  return m;
}

double TideSampleCalendar::max_tide() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& year : cycles)
    for (const auto& c : year) m = std::max(m, c.tide);
  return m;
}

TideSampleCalendar build_calendar(const SiteSeries& series) {
  std::map<int, std::vector<CalendarCycle>> by_year;
  std::map<int, std::array<int, 12>> months_seen;
  for (const auto& r : series.records) {
    by_year[r.year].push_back({r.peak_tide, r.day_of_year, r.day_of_month, r.month});
    ++months_seen[r.year][static_cast<std::size_t>(r.month - 1)];
  }
  TideSampleCalendar cal;
  for (auto& [year, cycles] : by_year) {
    const auto& seen = months_seen[year];
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c == 0; })) continue;
    cal.years.push_back(year);
    cal.cycles.push_back(std::move(cycles));
  }
  if (cal.cycles.empty())
    throw DataError(fmt::format("site {}: no year with cycles in all twelve months", series.site_id));
  return cal;
}

double powered_cdf(double f, double theta) {
  if (f <= 0.0) return 0.0;
  return std::exp(theta * std::log(f));
}

double annual_max_cdf(double z, const TideSampleCalendar& calendar, const CycleCdf& cdf, const ThetaFn& theta,
                      Exec exec) {
  const std::size_t K = calendar.n_years();
  if (K == 0) throw std::invalid_argument("empty tide calendar");
  std::vector<double> per_year(K);
  parallel_for(exec, K, [&](std::size_t k) {
    double log_sum = 0.0;
    for (const auto& c : calendar.cycles[k]) {
      const double y = z - c.tide;
      const double f = cdf(y, c);
      if (f <= 0.0) {
        per_year[k] = 0.0;
        return;
      }
      log_sum += theta(y) * std::log(f);
    }
    per_year[k] = std::exp(log_sum);
  });
  return std::accumulate(per_year.begin(), per_year.end(), 0.0) / static_cast<double>(K);
}

double annual_max_cdf(double z, const SkewSurgeModel& model, const ExiModel& exi, const TideSampleCalendar& calendar,
                      const CovariateScenario& scenario, Exec exec) {
  const CycleCdf cdf = [&](double y, const CalendarCycle& c) {
    return model.cdf(y, CycleCovariates{c.day_of_year, c.day_of_month, c.month, c.tide, scenario.year_std,
                                        scenario.gmt});
  };
  const ThetaFn theta = [&](double y) { return eval_exi(exi, y); };
  return annual_max_cdf(z, calendar, cdf, theta, exec);
}

double return_level(double p, const LevelCdf& cdf, double lo, double hi, const RootOptions& opts) {
  if (!(p >= 1e-6 && p <= 0.5)) throw std::invalid_argument(fmt::format("exceedance probability {} outside [1e-6, 0.5]", p));
  const double target = 1.0 - p;
  if (!(cdf(lo) <= target) || !(cdf(hi) >= target))
    throw std::runtime_error(fmt::format("return level for p={} not bracketed in [{}, {}]", p, lo, hi));
  for (int it = 0; it < opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(mid);
    if (std::abs(f - target) < opts.tolerance) return mid;
    if (f < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12) break;
  }
  return hi;
}

double return_level(double p, const SkewSurgeModel& model, const ExiModel& exi, const TideSampleCalendar& calendar,
                    const CovariateScenario& scenario, const RootOptions& opts, Exec exec) {
  const LevelCdf cdf = [&](double z) { return annual_max_cdf(z, model, exi, calendar, scenario, exec); };
  return return_level(p, cdf, calendar.min_tide() - 1.0, calendar.max_tide() + 10.0, opts);
}

ReturnCurve return_curve(std::span<const double> ps, const LevelCdf& cdf, double lo, double hi,
                         const RootOptions& opts, Exec exec) {
  ReturnCurve curve;
  curve.p.assign(ps.begin(), ps.end());
  curve.z.assign(ps.size(), 0.0);
  parallel_for(exec, ps.size(), [&](std::size_t i) { curve.z[i] = return_level(ps[i], cdf, lo, hi, opts); });
  std::vector<std::size_t> order(ps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ps[a] < ps[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (curve.z[order[i]] > curve.z[order[i - 1]])
      throw std::runtime_error(fmt::format("return curve not monotone between p={} and p={}", ps[order[i - 1]],
                                           ps[order[i]]));
  return curve;
}

ReturnCurve return_curve(std::span<const double> ps, const SkewSurgeModel& model, const ExiModel& exi,
                         const TideSampleCalendar& calendar, const CovariateScenario& scenario,
                         const RootOptions& opts, Exec exec) {
  // Grid points run in parallel; the per-year sums inside stay serial.
  const LevelCdf cdf = [&](double z) { return annual_max_cdf(z, model, exi, calendar, scenario, Exec::serial); };
  return return_curve(ps, cdf, calendar.min_tide() - 1.0, calendar.max_tide() + 10.0, opts, exec);
}

void write_return_curve_csv(std::ostream& os, const ReturnCurve& curve) {
  os << "p,return_period_years,z_m\n";
  for (std::size_t i = 0; i < curve.p.size(); ++i)
    os << fmt::format("{},{},{:.6f}\n", curve.p[i], 1.0 / curve.p[i], curve.z[i]);
}

}  // namespace skewsurge
