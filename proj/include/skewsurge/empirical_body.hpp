#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "skewsurge/core_data.hpp"

namespace skewsurge {

/// Skew surges of one (month, tide band) cell at or below the monthly threshold.
/// `total` counts every cycle in the cell, exceedances included, so the cell's
/// empirical CDF at the threshold is the below-threshold fraction.
struct BandSample {
  std::vector<double> sorted;
  std::size_t total = 0;
};

struct MonthBody {
  double tide_q33 = 0.0;
  double tide_q67 = 0.0;
  double threshold = 0.0;
  std::array<BandSample, 3> bands;
};

/// Per-month, per-tide-band empirical distribution of the skew-surge body.
class TideBandedEmpirical {
 public:
  TideBandedEmpirical() = default;
  explicit TideBandedEmpirical(std::array<MonthBody, 12> months);

  /// Band index 0, 1, 2 for tide x in month j (x <= q33, q33 < x <= q67, x > q67).
  int band_of(int month, double tide) const;
  const MonthBody& month(int month) const { return months_.at(static_cast<std::size_t>(month - 1)); }
  double threshold(int month) const { return month_ref(month).threshold; }
  MonthlyThresholds thresholds() const;

  /// (#samples <= y) / total for the band selected by the tide. Requires y <= u_j.
  double cdf(double y, int month, double tide) const;

 private:
  const MonthBody& month_ref(int month) const;
  std::array<MonthBody, 12> months_{};
};

TideBandedEmpirical build_empirical(const SiteSeries& series, const MonthlyThresholds& thresholds);

inline double eval_body_cdf(const TideBandedEmpirical& body, double y, int month, double tide) {
  return body.cdf(y, month, tide);
}

}  // namespace skewsurge
