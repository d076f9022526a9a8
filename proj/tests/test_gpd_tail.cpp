#include <doctest.h>

#include <cmath>

#include "skewsurge/gpd_tail.hpp"

using namespace skewsurge;

namespace {

RateParams plain_rate(RateFamily f, double lambda) {
  RateParams rp;
  rp.family = f;
  rp.lambda = lambda;
  rp.deltas.assign(trend_count(f), 0.0);
  return rp;
}

}  // namespace

TEST_SUITE("gpd-tail") {
  TEST_CASE("logit and inverse") {
    CHECK(logit(0.5) == 0.0);
    CHECK(std::abs(inv_logit(logit(0.05)) - 0.05) < 1e-12);
    CHECK(logit(0.05) == doctest::Approx(-2.9444).epsilon(1e-4));
    CHECK_THROWS(logit(0.0));
    CHECK_THROWS(logit(1.0));
  }

  TEST_CASE("family names") {
    for (auto f : {RateFamily::R0, RateFamily::R1, RateFamily::R2, RateFamily::R3, RateFamily::R4})
      CHECK(parse_rate_family(to_string(f)) == f);
    for (auto f : {ScaleFamily::S0, ScaleFamily::S1, ScaleFamily::S2, ScaleFamily::S3, ScaleFamily::S4})
      CHECK(parse_scale_family(to_string(f)) == f);
    CHECK_THROWS(parse_rate_family("R5"));
    CHECK(trend_count(RateFamily::R2) == 4);
    CHECK(trend_count(ScaleFamily::S3) == 1);
    CHECK(trend_covariate(RateFamily::R4) == Covariate::gmt);
  }

  TEST_CASE("scale harmonic and trend") {
    ScaleParams sp;
    sp.alpha = 0.1;
    sp.beta = 0.05;
    sp.phase = 100.0;
    CHECK(scale_at(sp, 100, 3.0, 0.0, 0.0) == doctest::Approx(0.1).epsilon(1e-12));
    sp.phase = 100.0 - 91.25;
    CHECK(scale_at(sp, 100, 3.0, 0.0, 0.0) == doctest::Approx(0.15).epsilon(1e-12));

    ScaleParams s1 = sp;
    s1.family = ScaleFamily::S1;
    s1.deltas = {0.001};
    CHECK(scale_at(s1, 100, 3.0, 1.0, 0.0) == doctest::Approx(scale_at(sp, 100, 3.0, 1.0, 0.0) + 0.001));
  }

  TEST_CASE("seasonal trend models nest the uniform ones") {
    ScaleParams s1;
    s1.family = ScaleFamily::S1;
    s1.alpha = 0.12;
    s1.beta = 0.03;
    s1.phase = 40;
    s1.gamma = 0.02;
    s1.deltas = {0.013};
    ScaleParams s2 = s1;
    s2.family = ScaleFamily::S2;
    s2.deltas.assign(4, 0.013);
    ScaleParams s3 = s1;
    s3.family = ScaleFamily::S3;
    ScaleParams s4 = s2;
    s4.family = ScaleFamily::S4;
    for (int d = 1; d <= 365; d += 7) {
      CHECK(scale_at(s2, d, 3.1, 0.4, 0.7) == doctest::Approx(scale_at(s1, d, 3.1, 0.4, 0.7)).epsilon(1e-14));
      CHECK(scale_at(s4, d, 3.1, 0.4, 0.7) == doctest::Approx(scale_at(s3, d, 3.1, 0.4, 0.7)).epsilon(1e-14));
    }
  }

  TEST_CASE("rate identities") {
    RateParams rp = plain_rate(RateFamily::R0, 0.05);
    rp.standardizers.tide_mean = 3.0;
    rp.standardizers.tide_sd = 1.2;
    CHECK(rate_at(rp, 50, 10, 2, 4.0, 0.0, 0.0) == doctest::Approx(0.05).epsilon(1e-14));
    rp.alpha_tide = 0.7;
    rp.beta_tide = 0.4;
    CHECK(rate_at(rp, 50, 10, 2, 3.0, 0.0, 0.0) == doctest::Approx(0.05).epsilon(1e-14));

    RateParams r3 = plain_rate(RateFamily::R3, 0.05);
    r3.deltas = {0.336};
    CHECK(rate_at(r3, 50, 1, 2, 0.0, 0.0, 1.0) == doctest::Approx(inv_logit(-2.6084)).epsilon(1e-4));
    CHECK(rate_at(r3, 50, 1, 2, 0.0, 0.0, 1.0) == doctest::Approx(0.0686).epsilon(1e-3));
  }

  TEST_CASE("trend rate models reduce to R0 at a zero covariate") {
    RateParams r0 = plain_rate(RateFamily::R0, 0.04);
    r0.beta_day = 0.05;
    r0.phase_day = 30;
    r0.alpha_tide = 0.3;
    r0.beta_tide = 0.2;
    r0.phase_tide = 200;
    r0.standardizers.tide_mean = 3.0;
    r0.standardizers.tide_sd = 1.0;
    r0.standardizers.mean_day_of_month.fill(15.5);
    RateParams r1 = r0;
    r1.family = RateFamily::R1;
    r1.deltas = {0.4};
    RateParams r3 = r0;
    r3.family = RateFamily::R3;
    r3.deltas = {0.4};
    for (int d = 1; d <= 365; d += 11) {
      const int m = month_of_day_of_year(d);
      CHECK(rate_at(r1, d, 7, m, 3.5, 0.0, 0.9) == doctest::Approx(rate_at(r0, d, 7, m, 3.5, 0.0, 0.9)).epsilon(1e-14));
      CHECK(rate_at(r3, d, 7, m, 3.5, 0.9, 0.0) == doctest::Approx(rate_at(r0, d, 7, m, 3.5, 0.9, 0.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("tail probability") {
    CHECK(gpd_tail_prob(0.3, 0.2, 1.0, 0.1, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(gpd_tail_prob(0.4, 0.2, 1.0, 0.1, -0.5) == 0.0);
    CHECK(gpd_tail_prob(0.2, 0.2, 0.05, 0.1, 0.1) == doctest::Approx(0.05));
    for (double xi : {1e-9, -1e-9, 2e-8, -2e-8}) {
      for (double y : {0.21, 0.3, 0.6}) {
        const double limit = 0.07 * std::exp(-(y - 0.2) / 0.1);
        CHECK(std::abs(gpd_tail_prob(y, 0.2, 0.07, 0.1, xi) - limit) < 1e-9);
      }
    }
  }

  TEST_CASE("mean excess") {
    CHECK(mean_excess(0.1, 0.2) == doctest::Approx(0.125));
    CHECK(mean_excess(0.1, 0.0) == 0.1);
    CHECK(mean_excess(0.1, 0.99) == doctest::Approx(10.0));
    CHECK_THROWS(mean_excess(0.1, 1.0));
  }

  TEST_CASE("delta lambda") {
    RateParams r1 = plain_rate(RateFamily::R1, 0.035);
    CHECK(delta_lambda(r1, 100, 1, 4, 0.0, Covariate::year, -0.91, 1.0) == 0.0);
    r1.deltas = {0.215};
    const double d = delta_lambda(r1, 100, 1, 4, 0.0, Covariate::year, -0.91, 1.0);
    const double expect = inv_logit(logit(0.035) + 0.215) - inv_logit(logit(0.035) - 0.91 * 0.215);
    CHECK(d == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::round(d * 1e4) / 1e4 == 0.0141);
    CHECK_THROWS(delta_lambda(r1, 100, 1, 4, 0.0, Covariate::gmt, 0.0, 1.0));
  }

  TEST_CASE("positive trend gives positive delta lambda everywhere") {
    RateParams r1 = plain_rate(RateFamily::R1, 0.05);
    r1.beta_day = 0.05;
    r1.alpha_tide = 0.4;
    r1.beta_tide = 0.3;
    r1.phase_tide = 120;
    r1.standardizers.tide_mean = 3.0;
    r1.standardizers.mean_day_of_month.fill(15.5);
    r1.deltas = {0.2};
    for (int d = 1; d <= 365; d += 3)
      for (double x = 1.0; x <= 5.0; x += 0.25) {
        const int m = month_of_day_of_year(d);
        CHECK(delta_lambda(r1, d, 1 + d % 28, m, x, Covariate::year, -0.9057, 1.0) > 0.0);
      }
  }

  TEST_CASE("tail density shape does not depend on lambda") {
    for (double xi : {-0.2, 0.0, 0.3}) {
      std::size_t best[2] = {0, 0};
      const double lambdas[2] = {0.02, 0.2};
      for (int k = 0; k < 2; ++k) {
        double top = -1.0;
        for (std::size_t i = 0; i < 400; ++i) {
          const double dens = lambdas[k] * std::exp(gpd_log_density(0.001 * i, 0.1, xi));
          if (dens > top) {
            top = dens;
            best[k] = i;
          }
        }
      }
      CHECK(best[0] == best[1]);
    }
  }

  TEST_CASE("full cdf: body below the threshold, tail above") {
    std::array<MonthBody, 12> months{};
    for (auto& mb : months) {
      mb.tide_q33 = 2.0;
      mb.tide_q67 = 4.0;
      mb.threshold = 0.2;
      for (auto& b : mb.bands) b = BandSample{{-0.1, 0.0, 0.1, 0.15}, 5};
    }
    const TideBandedEmpirical body(months);
    TailParams tail;
    tail.rate = plain_rate(RateFamily::R0, 0.05);
    tail.scale.alpha = 0.1;
    tail.scale.beta = 0.02;
    tail.shape = 0.1;
    CycleCovariates c{45, 14, 2, 3.0, 0.0, 0.0};
    CHECK(eval_cdf(0.05, c, body, tail) == eval_body_cdf(body, 0.05, 2, 3.0));
    CHECK(eval_cdf(0.2, c, body, tail) == eval_body_cdf(body, 0.2, 2, 3.0));
    CHECK(eval_cdf(0.2 + 1e-12, c, body, tail) == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(eval_cdf(1e6, c, body, tail) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 0.0;
    for (double y = -0.3; y < 0.2; y += 0.005) {
      const double f = eval_cdf(y, c, body, tail);
      CHECK(f >= prev);
      prev = f;
    }
    prev = 0.0;
    for (double y = 0.2001; y < 3.0; y += 0.01) {
      const double f = eval_cdf(y, c, body, tail);
      CHECK(f >= prev);
      CHECK(f <= 1.0);
      prev = f;
    }
  }
}
