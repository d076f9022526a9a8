#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skewsurge {

/// Input or data-consistency failure (bad file, invariant violated, too little data).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Season { winter = 0, spring = 1, summer = 2, autumn = 3 };

/// DJF, MAM, JJA, SON.
Season season_of_month(int month);
std::string_view season_name(Season s);

/// Day of year on a 365-day calendar. February 29 shares day 59 with February 28.
int day_of_year_365(int month, int day_of_month);
/// Inverse month lookup on the 365-day calendar (1..365 -> 1..12).
int month_of_day_of_year(int day_of_year);

using Timestamp = std::chrono::sys_seconds;

Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct YearScale {
  double mid = 1968.0;
  double half = 53.0;
};

/// One tidal cycle. Levels in metres; covariates are NaN until attach_covariates().
struct TidalCycleRecord {
  Timestamp timestamp{};
  int year = 0;
  int month = 1;
  int day_of_year = 1;
  int day_of_month = 1;
  double peak_tide = 0.0;
  std::optional<double> max_sea_level;
  double skew_surge = 0.0;

  double year_std = std::numeric_limits<double>::quiet_NaN();
  double gmt = std::numeric_limits<double>::quiet_NaN();

  Season season() const { return season_of_month(month); }
  bool has_year_covariate() const { return year_std == year_std; }
  bool has_gmt_covariate() const { return gmt == gmt; }
};

/// Builds a record from a timestamp and levels, filling calendar fields.
/// At least one of max_sea_level / skew_surge must be given; when both are,
/// they must agree with the peak tide to 1e-9 m.
TidalCycleRecord make_record(Timestamp t, double peak_tide, std::optional<double> max_sea_level,
                             std::optional<double> skew_surge);

struct SiteSeries {
  std::string site_id;
  std::vector<TidalCycleRecord> records;  // strictly increasing timestamps
  double msl_trend_rate = 0.0;            // mm/year removed so far
  int reference_year = 2017;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Annual global-mean-temperature anomalies (degC relative to 1961-1990).
class GmtSeries {
 public:
  GmtSeries() = default;
  explicit GmtSeries(std::map<int, double> anomalies) : anomalies_(std::move(anomalies)) {}

  static GmtSeries load(const std::filesystem::path& path);

  bool contains(int year) const { return anomalies_.count(year) != 0; }
  double at(int year) const;
  bool empty() const { return anomalies_.empty(); }
  const std::map<int, double>& values() const { return anomalies_; }
  void write_csv(std::ostream& os) const;

 private:
  std::map<int, double> anomalies_;
};

struct MonthlyThresholds {
  std::array<double, 12> u{};
  double percentile = 0.95;

  double operator[](int month) const { return u.at(static_cast<std::size_t>(month - 1)); }
};

inline constexpr std::size_t kMinMonthlyObservations = 30;

/// All sites found in a gauge CSV, keyed by site id.
std::map<std::string, SiteSeries> load_sites(const std::filesystem::path& path);

/// One site from a gauge CSV. With an empty `site` the file must hold exactly one site.
SiteSeries load_series(const std::filesystem::path& path, std::string_view site = {});
SiteSeries parse_series(std::istream& in, std::string_view site = {},
                        std::string_view source = "<stream>");

/// Writes the ingest CSV format (header plus one row per cycle).
void write_series_csv(std::ostream& os, const SiteSeries& series);

/// Moves historic levels onto the reference-year datum:
/// z' = z + rate * (reference_year - year) / 1000. Tides are untouched.
SiteSeries detrend_msl(SiteSeries series, double rate_mm_per_year, int reference_year);

double standardize_year(double year, double mid = 1968.0, double half = 53.0);
inline double standardize_year(double year, const YearScale& s) {
  return standardize_year(year, s.mid, s.half);
}

/// Linear interpolation between order statistics: with h = (n-1)p, returns
/// x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]) on the sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

MonthlyThresholds monthly_thresholds(const SiteSeries& series, double percentile = 0.95);

/// Sets year_std on every record and gmt from the series; every year must be covered.
SiteSeries attach_covariates(SiteSeries series, const GmtSeries& gmt, const YearScale& scale = {});
/// Year covariate only; gmt stays NaN.
SiteSeries attach_covariates(SiteSeries series, const YearScale& scale = {});

}  // namespace skewsurge
