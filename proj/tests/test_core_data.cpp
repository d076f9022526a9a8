#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewsurge/core_data.hpp"

using namespace skewsurge;

namespace {

SiteSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_series(in);
}

// n cycles per month in 2001, skew surges from `value(month, i)`.
template <class F>
SiteSeries monthly_series(int n, F value) {
  SiteSeries s;
  s.site_id = "T";
  for (int m = 1; m <= 12; ++m)
    for (int i = 0; i < n; ++i) {
      const auto t = std::chrono::sys_days{std::chrono::year{2001} / m / 1} + std::chrono::minutes(30 * i);
      s.records.push_back(make_record(t, 3.0, std::nullopt, value(m, i)));
    }
  return s;
}

}  // namespace

TEST_SUITE("core-data") {
  TEST_CASE("row with level and tide gives the skew surge") {
    const auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-01-03T04:12Z,5.0,5.2\n");
    REQUIRE(s.records.size() == 1);
    const auto& r = s.records[0];
    CHECK(r.skew_surge == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.year == 1917);
    CHECK(r.month == 1);
    CHECK(r.day_of_month == 3);
    CHECK(r.day_of_year == 3);
    CHECK(s.site_id == "NEW");
  }

  TEST_CASE("empty input is an error naming no records") {
    std::istringstream in("");
    CHECK_THROWS_WITH_AS(parse_series(in), doctest::Contains("no records"), DataError);
    std::istringstream header_only("site,timestamp,peak_tide_m,max_sea_level_m\n");
    CHECK_THROWS_WITH_AS(parse_series(header_only), doctest::Contains("no records"), DataError);
  }

  TEST_CASE("duplicate timestamps are rejected") {
    CHECK_THROWS_WITH_AS(parse("site,timestamp,peak_tide_m,max_sea_level_m\n"
                               "NEW,1917-01-03T04:12Z,5.0,5.2\nNEW,1917-01-03T04:12Z,5.1,5.3\n"),
                         doctest::Contains("duplicate timestamp"), DataError);
  }

  TEST_CASE("malformed rows report the line number") {
    CHECK_THROWS_WITH_AS(parse("site,timestamp,peak_tide_m,max_sea_level_m\n"
                               "NEW,1917-01-03T04:12Z,5.0,5.2\nNEW,1917-01-03T16:40Z,abc,5.2\n"),
                         doctest::Contains(":3:"), DataError);
    CHECK_THROWS_AS(parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-13-03T04:12Z,5.0,5.2\n"),
                    DataError);
    CHECK_THROWS_AS(parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-01-03T04:12Z,5.0\n"), DataError);
  }

  TEST_CASE("records are sorted and the surge column is cross-checked") {
    const auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m,skew_surge_m\n"
                         "A,2000-01-02T00:00Z,4.0,4.5,0.5\nA,2000-01-01T00:00Z,3.0,,0.25\n");
    REQUIRE(s.records.size() == 2);
    CHECK(s.records[0].timestamp < s.records[1].timestamp);
    CHECK(s.records[0].skew_surge == 0.25);
    CHECK_FALSE(s.records[0].max_sea_level.has_value());
    CHECK_THROWS_AS(parse("site,timestamp,peak_tide_m,max_sea_level_m,skew_surge_m\nA,2000-01-02T00:00Z,4.0,4.5,0.7\n"),
                    DataError);
  }

  TEST_CASE("load_series names a missing path") {
    CHECK_THROWS_WITH_AS(load_series("/nonexistent/gauge.csv"), doctest::Contains("/nonexistent/gauge.csv"), DataError);
  }

  TEST_CASE("write_series_csv round trips") {
    const auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-01-03T04:12Z,5.0,5.2\n"
                         "NEW,1917-01-03T16:37Z,4.5,4.6\n");
    std::ostringstream os;
    write_series_csv(os, s);
    const auto back = parse(os.str());
    REQUIRE(back.records.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(back.records[i].timestamp == s.records[i].timestamp);
      CHECK(back.records[i].skew_surge == s.records[i].skew_surge);
    }
  }

  TEST_CASE("detrend adjusts levels to the reference year") {
    auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-01-03T04:12Z,4.8,5.0\n"
                   "NEW,2017-06-01T00:00Z,4.8,5.0\n");
    const auto d = detrend_msl(s, 1.73, 2017);
    CHECK(*d.records[0].max_sea_level == doctest::Approx(5.173).epsilon(1e-12));
    CHECK(d.records[0].peak_tide == 4.8);
    CHECK(d.records[0].skew_surge == doctest::Approx(5.173 - 4.8).epsilon(1e-12));
    CHECK(*d.records[1].max_sea_level == 5.0);

    const auto same = detrend_msl(s, 0.0, 2017);
    CHECK(*same.records[0].max_sea_level == 5.0);
    CHECK(same.records[0].skew_surge == s.records[0].skew_surge);
  }

  TEST_CASE("detrending twice adds the rates") {
    auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m\nNEW,1917-01-03T04:12Z,4.8,5.0\n"
                   "NEW,1950-01-03T04:12Z,4.1,4.3\nNEW,2040-01-03T04:12Z,4.1,4.4\n");
    const auto twice = detrend_msl(detrend_msl(s, 1.2, 2017), 0.53, 2017);
    const auto once = detrend_msl(s, 1.73, 2017);
    for (std::size_t i = 0; i < s.records.size(); ++i) {
      CHECK(std::abs(*twice.records[i].max_sea_level - *once.records[i].max_sea_level) < 1e-12);
      CHECK(std::abs(twice.records[i].skew_surge - once.records[i].skew_surge) < 1e-12);
    }
    CHECK(twice.msl_trend_rate == doctest::Approx(1.73));
  }

  TEST_CASE("standardize_year") {
    CHECK(standardize_year(1968) == 0.0);
    CHECK(standardize_year(1920) == doctest::Approx(-0.9057).epsilon(1e-4));
    CHECK(standardize_year(2021) == 1.0);
    CHECK_THROWS(standardize_year(2000, 1968, 0.0));
    for (int y = 1900; y < 2100; ++y) CHECK(standardize_year(y) < standardize_year(y + 1));
  }

  TEST_CASE("quantile interpolates order statistics") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    CHECK(quantile(v, 0.95) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(quantile({2.5, 2.5, 2.5}, 0.95) == 2.5);
  }

  TEST_CASE("monthly thresholds are per month and monotone in the percentile") {
    const auto s = monthly_series(100, [](int m, int i) { return m * 100.0 + i + 1; });
    const auto t = monthly_thresholds(s, 0.95);
    for (int m = 1; m <= 12; ++m) CHECK(t[m] == doctest::Approx(m * 100.0 + 95.05));

    const auto constant = monthly_thresholds(monthly_series(40, [](int, int) { return 0.3; }), 0.95);
    for (int m = 1; m <= 12; ++m) CHECK(constant[m] == 0.3);

    const auto noisy = monthly_series(200, [](int m, int i) { return std::sin(0.37 * i * m) + 0.01 * i; });
    double prev_p = 0.6;
    auto prev = monthly_thresholds(noisy, prev_p);
    for (double p = 0.65; p < 0.999; p += 0.05) {
      const auto cur = monthly_thresholds(noisy, p);
      for (int m = 1; m <= 12; ++m) CHECK(prev[m] <= cur[m]);
      prev = cur;
      prev_p = p;
    }
  }

  TEST_CASE("exceedance count matches (1 - p) n within one") {
    const auto s = monthly_series(173, [](int m, int i) { return std::cos(1.3 * i + m) * (1 + 0.001 * i); });
    for (double p : {0.9, 0.95, 0.99}) {
      const auto t = monthly_thresholds(s, p);
      std::array<int, 12> count{};
      for (const auto& r : s.records)
        if (r.skew_surge > t[r.month]) ++count[static_cast<std::size_t>(r.month - 1)];
      for (int c : count) CHECK(std::abs(c - (1 - p) * 173) <= 1.0);
    }
  }

  TEST_CASE("sparse month is an error") {
    auto s = monthly_series(40, [](int, int i) { return i * 0.01; });
    s.records.erase(std::remove_if(s.records.begin(), s.records.end(),
                                   [](const TidalCycleRecord& r) { return r.month == 4 && r.skew_surge > 0.2; }),
                    s.records.end());
    CHECK_THROWS_WITH_AS(monthly_thresholds(s), doctest::Contains("month 4"), DataError);
  }

  TEST_CASE("attach_covariates") {
    auto s = parse("site,timestamp,peak_tide_m,max_sea_level_m\nA,1990-12-03T04:12Z,4.8,5.0\n"
                   "A,1991-03-01T04:12Z,4.8,5.0\n");
    GmtSeries g({{1990, 0.2}, {1991, 0.25}});
    const auto out = attach_covariates(s, g);
    CHECK(out.records[0].gmt == 0.2);
    CHECK(out.records[0].year_std == doctest::Approx((1990 - 1968) / 53.0));
    CHECK(out.records[0].season() == Season::winter);
    CHECK(out.records[1].season() == Season::spring);

    GmtSeries missing({{1990, 0.2}});
    CHECK_THROWS_WITH_AS(attach_covariates(s, missing), doctest::Contains("1991"), DataError);
  }

  TEST_CASE("season map is DJF/MAM/JJA/SON") {
    const Season expect[12] = {Season::winter, Season::winter, Season::spring, Season::spring,
                               Season::spring, Season::summer, Season::summer, Season::summer,
                               Season::autumn, Season::autumn, Season::autumn, Season::winter};
    for (int m = 1; m <= 12; ++m) CHECK(season_of_month(m) == expect[m - 1]);
    CHECK_THROWS(season_of_month(13));
  }

  TEST_CASE("leap day shares day 59") {
    CHECK(day_of_year_365(2, 29) == 59);
    CHECK(day_of_year_365(2, 28) == 59);
    CHECK(day_of_year_365(3, 1) == 60);
    CHECK(day_of_year_365(12, 31) == 365);
    for (int d = 1; d <= 365; ++d) {
      const int m = month_of_day_of_year(d);
      CHECK(m >= 1);
      CHECK(m <= 12);
    }
  }

  TEST_CASE("GMT file loading") {
    CHECK_THROWS_WITH_AS(GmtSeries::load("/nonexistent/gmt.csv"), doctest::Contains("/nonexistent/gmt.csv"), DataError);
  }
}
