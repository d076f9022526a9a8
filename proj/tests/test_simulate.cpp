#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sim_fixtures.hpp"
#include "skewsurge/simulate.hpp"

using namespace skewsurge;

namespace {

SimSpec constant_spec(std::size_t n, std::uint64_t seed) {
  SimSpec s;
  s.n_cycles = n;
  s.seed = seed;
  s.thresholds = testing::seasonal_thresholds();
  s.rate.lambda = 0.05;
  s.scale.alpha = 0.1;
  s.scale.beta = 0.0;
  s.shape = 0.1;
  return s;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("fixed seed reproduces the series exactly") {
    const auto a = simulate_series(testing::r1_s0_spec(5, 3000));
    const auto b = simulate_series(testing::r1_s0_spec(5, 3000));
    REQUIRE(a.series.records.size() == b.series.records.size());
    for (std::size_t i = 0; i < a.series.records.size(); ++i) {
      CHECK(a.series.records[i].timestamp == b.series.records[i].timestamp);
      CHECK(a.series.records[i].skew_surge == b.series.records[i].skew_surge);
    }
  }

  TEST_CASE("another seed changes values but not structure") {
    const auto a = simulate_series(testing::r1_s0_spec(5, 3000));
    const auto b = simulate_series(testing::r1_s0_spec(6, 3000));
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.series.records.size(); ++i) {
      CHECK(a.series.records[i].timestamp == b.series.records[i].timestamp);
      CHECK(a.series.records[i].month == b.series.records[i].month);
      CHECK(a.series.records[i].peak_tide == b.series.records[i].peak_tide);
      differ += a.series.records[i].skew_surge != b.series.records[i].skew_surge ? 1 : 0;
    }
    CHECK(differ == a.series.records.size());
  }

  TEST_CASE("indicator agrees with the threshold exactly") {
    const auto spec = testing::r1_s0_spec(9, 20000);
    const auto out = simulate_series(spec);
    for (std::size_t i = 0; i < out.exceed.size(); ++i) {
      const auto& r = out.series.records[i];
      CHECK((r.skew_surge > spec.thresholds[r.month]) == out.exceed[i]);
      CHECK(r.skew_surge == *r.max_sea_level - r.peak_tide);
    }
  }

  TEST_CASE("constant rate: binomial exceedance fraction") {
    const std::size_t n = 100000;
    const auto out = simulate_series(constant_spec(n, 12));
    const double frac = static_cast<double>(std::count(out.exceed.begin(), out.exceed.end(), true)) / n;
    CHECK(std::abs(frac - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / n));
  }

  TEST_CASE("excesses follow the GPD") {
    const auto spec = constant_spec(100000, 13);
    const auto out = simulate_series(spec);
    std::vector<double> excess;
    for (std::size_t i = 0; i < out.exceed.size(); ++i)
      if (out.exceed[i]) {
        const auto& r = out.series.records[i];
        excess.push_back(r.skew_surge - spec.thresholds[r.month]);
      }
    std::sort(excess.begin(), excess.end());
    const double n = static_cast<double>(excess.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < excess.size(); ++i) {
      const double f = 1.0 - std::pow(1.0 + 0.1 * excess[i] / 0.1, -1.0 / 0.1);
      ks = std::max({ks, (i + 1) / n - f, f - i / n});
    }
    INFO("KS statistic ", ks, " over ", n, " excesses");
    CHECK(ks < 1.358 / std::sqrt(n));
  }

  TEST_CASE("gpd quantile inverts the tail probability") {
    for (double xi : {-0.3, 0.0, 1e-9, 0.2})
      for (double u : {0.01, 0.5, 0.9, 0.999}) {
        const double e = gpd_quantile(u, 0.1, xi);
        CHECK(gpd_tail_prob(e, 0.0, 1.0, 0.1, xi) == doctest::Approx(1.0 - u).epsilon(1e-10));
      }
  }

  TEST_CASE("truth carries standardizers from the generated tides") {
    const auto out = simulate_series(testing::r1_s0_spec(1, 5000));
    const auto st = tide_standardizers(out.series);
    CHECK(out.truth.rate.standardizers.tide_mean == st.tide_mean);
    CHECK(out.truth.rate.standardizers.tide_sd == st.tide_sd);
  }

  TEST_CASE("spec validation") {
    auto s = testing::r1_s0_spec(1, 100);
    s.rate.family = RateFamily::R3;
    CHECK_THROWS(simulate_series(s));  // GMT path missing
    s = testing::r1_s0_spec(1, 100);
    s.rate.lambda = 1.5;
    CHECK_THROWS(simulate_series(s));
  }
}
