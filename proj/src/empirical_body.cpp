#include "skewsurge/empirical_body.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

TideBandedEmpirical::TideBandedEmpirical(std::array<MonthBody, 12> months) : months_(std::move(months)) {
  for (std::size_t m = 0; m < 12; ++m) {
    const auto& mb = months_[m];
    if (!(mb.tide_q33 <= mb.tide_q67))
      throw std::invalid_argument(fmt::format("month {}: tide band cut-points out of order", m + 1));
    for (const auto& band : mb.bands) {
      if (!std::is_sorted(band.sorted.begin(), band.sorted.end()))
        throw std::invalid_argument(fmt::format("month {}: band sample not sorted", m + 1));
      if (!band.sorted.empty() && band.sorted.back() > mb.threshold)
        throw std::invalid_argument(fmt::format("month {}: band sample above threshold", m + 1));
      if (band.total < band.sorted.size())
        throw std::invalid_argument(fmt::format("month {}: band total below sample size", m + 1));
    }
  }
}

const MonthBody& TideBandedEmpirical::month_ref(int month) const {
  if (month < 1 || month > 12) throw std::out_of_range(fmt::format("month {} out of range", month));
  return months_[static_cast<std::size_t>(month - 1)];
}

int TideBandedEmpirical::band_of(int month, double tide) const {
  const auto& mb = month_ref(month);
  if (tide <= mb.tide_q33) return 0;
  if (tide <= mb.tide_q67) return 1;
  return 2;
}

MonthlyThresholds TideBandedEmpirical::thresholds() const {
  MonthlyThresholds t;
  t.percentile = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t m = 0; m < 12; ++m) t.u[m] = months_[m].threshold;
  return t;
}

double TideBandedEmpirical::cdf(double y, int month, double tide) const {
  const auto& mb = month_ref(month);
  if (y > mb.threshold)
    throw std::domain_error(
        fmt::format("body CDF evaluated at {} above month {} threshold {}", y, month, mb.threshold));
  const auto& band = mb.bands[static_cast<std::size_t>(band_of(month, tide))];
  if (band.total == 0) throw std::domain_error(fmt::format("month {}: empty tide band", month));
  const auto count = std::upper_bound(band.sorted.begin(), band.sorted.end(), y) - band.sorted.begin();
  return static_cast<double>(count) / static_cast<double>(band.total);
}

TideBandedEmpirical build_empirical(const SiteSeries& series, const MonthlyThresholds& thresholds) {
  std::array<std::vector<double>, 12> tides;
  for (const auto& r : series.records) tides[static_cast<std::size_t>(r.month - 1)].push_back(r.peak_tide);

  std::array<MonthBody, 12> months{};
  for (std::size_t m = 0; m < 12; ++m) {
    if (tides[m].empty())
      throw DataError(fmt::format("site {}: no cycles in month {}", series.site_id, m + 1));
    std::sort(tides[m].begin(), tides[m].end());
    months[m].tide_q33 = quantile_sorted(tides[m], 0.33);
    months[m].tide_q67 = quantile_sorted(tides[m], 0.67);
    months[m].threshold = thresholds.u[m];
  }

  const auto band_index = [&](const MonthBody& mb, double x) {
    return x <= mb.tide_q33 ? 0u : (x <= mb.tide_q67 ? 1u : 2u);
  };
  for (const auto& r : series.records) {
    auto& mb = months[static_cast<std::size_t>(r.month - 1)];
    auto& band = mb.bands[band_index(mb, r.peak_tide)];
    ++band.total;
    if (r.skew_surge <= mb.threshold) band.sorted.push_back(r.skew_surge);
  }
  for (std::size_t m = 0; m < 12; ++m) {
    for (std::size_t b = 0; b < 3; ++b) {
      auto& band = months[m].bands[b];
      if (band.sorted.empty())
        throw DataError(fmt::format("site {}: month {} tide band {} has no skew surges below the threshold",
                                    series.site_id, m + 1, b + 1));
      std::sort(band.sorted.begin(), band.sorted.end());
    }
  }
  return TideBandedEmpirical(std::move(months));
}

}  // namespace skewsurge
