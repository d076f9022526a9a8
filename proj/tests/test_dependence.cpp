#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sim_fixtures.hpp"
#include "skewsurge/dependence.hpp"

using namespace skewsurge;

namespace {

// Kendall tau-b by enumerating all pairs.
double tau_b_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long long conc = 0, disc = 0, tx = 0, ty = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tx;
      } else if (dy == 0) {
        ++ty;
      } else if ((dx > 0) == (dy > 0)) {
        ++conc;
      } else {
        ++disc;
      }
    }
  return static_cast<double>(conc - disc) /
         std::sqrt(static_cast<double>(conc + disc + tx) * static_cast<double>(conc + disc + ty));
}

Day day(int y, int m, int d) { return std::chrono::sys_days{std::chrono::year{y} / m / d}; }

SiteSeries two_cycles_per_day(const std::string& id, int first_day, int days, double scale, std::vector<int> skip = {}) {
  SiteSeries s;
  s.site_id = id;
  for (int k = 0; k < days; ++k) {
    if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
    const auto d = day(2010, 1, 1) + std::chrono::days(first_day + k);
    s.records.push_back(make_record(d + std::chrono::hours(3), 3.0, std::nullopt, scale * k));
    s.records.push_back(make_record(d + std::chrono::hours(15), 3.0, std::nullopt, scale * k + 0.5));
  }
  return s;
}

}  // namespace

TEST_SUITE("dependence") {
  TEST_CASE("daily maxima and lag alignment") {
    const auto a = two_cycles_per_day("A", 0, 10, 1.0);
    const auto b = two_cycles_per_day("B", 0, 10, 10.0, {4});
    const auto da = daily_maxima(a);
    REQUIRE(da.size() == 10);
    CHECK(da[3].value == 3.5);

    const auto p0 = daily_max_pairs(a, b, 0);
    CHECK(p0.size() == 9);  // day 4 missing at B
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0.b[i] == doctest::Approx(10.0 * (p0.a[i] - 0.5) + 0.5));

    const auto p1 = daily_max_pairs(a, b, 1);
    for (std::size_t i = 0; i < p1.size(); ++i) {
      CHECK(p1.b[i] == doctest::Approx(10.0 * (p1.a[i] + 0.5) + 0.5));  // B one day later
      CHECK(p1.dates[i] != day(2010, 1, 4));                         // A's day 3 pairs with B's missing day 4
    }
    CHECK(p1.size() == 8);
    const auto pm = daily_max_pairs(a, b, -1);
    for (std::size_t i = 0; i < pm.size(); ++i) CHECK(pm.b[i] == doctest::Approx(10.0 * (pm.a[i] - 1.5) + 0.5));
  }

  TEST_CASE("kendall tau special cases") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> up = {2, 4, 6, 8, 10};
    const std::vector<double> down = {10, 8, 6, 4, 2};
    CHECK(kendall_tau(x, up) == 1.0);
    CHECK(kendall_tau(x, down) == -1.0);
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {3, 1, 2, 4};
    CHECK(kendall_tau(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const std::vector<double> constant = {1, 1, 1, 1};
    CHECK_THROWS(kendall_tau(a, constant));
  }

  TEST_CASE("kendall tau matches pair enumeration, ties included") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + rng() % 40;
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng() % 8);
        y[i] = static_cast<double>(rng() % 8) + 0.1 * x[i];
      }
      if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
          std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }))
        continue;
      CHECK(kendall_tau(x, y) == doctest::Approx(tau_b_oracle(x, y)).epsilon(1e-14));
    }
  }

  TEST_CASE("comonotone pairs") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> a(2000);
    for (auto& v : a) v = g(rng);
    const auto est = chi_chibar(a, a, 0.05);
    CHECK(est.chi == 1.0);
    REQUIRE(est.chibar.has_value());
    CHECK(*est.chibar == 1.0);
    CHECK(kendall_tau(a, a) == 1.0);
  }

  TEST_CASE("hand-built six-point samples") {
    const std::vector<double> a = {1, 2, 3, 4, 5, 6};
    const std::vector<double> b = {1, 5, 2, 6, 4, 3};
    const auto half = chi_chibar(a, b, 0.5);
    CHECK(half.marginal == 3);
    CHECK(half.joint == 2);
    CHECK(half.chi == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(*half.chibar == doctest::Approx(2.0 * std::log(0.5) / std::log(1.0 / 3.0) - 1.0).epsilon(1e-15));
    const std::vector<double> c = {1, 2, 3, 4, 6, 5};
    const auto third = chi_chibar(a, c, 1.0 / 3.0);
    CHECK(third.marginal == 2);
    CHECK(third.joint == 2);
    CHECK(third.chi == 1.0);
  }

  TEST_CASE("independent pairs") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 10000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    const double p = 0.05;
    const auto est = chi_chibar(a, b, p);
    REQUIRE(est.chibar.has_value());
    CHECK(std::abs(*est.chibar) < 0.1);
    const double frac = static_cast<double>(est.joint) / n;
    CHECK(std::abs(frac - p * p) < 3.0 * std::sqrt(p * p * (1 - p * p) / n));
    CHECK(std::abs(est.chi - p) < 3.0 * std::sqrt(p * (1 - p) / est.marginal));
    CHECK(est.chi <= 1.0);
  }

  TEST_CASE("rank statistics ignore increasing transforms") {
    std::mt19937_64 rng(8);
    std::gamma_distribution<double> g(2.0, 1.0);
    std::vector<double> a(3000), b(3000), ta(3000), tb(3000);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g(rng);
      b[i] = 0.6 * a[i] + g(rng);
      ta[i] = std::log1p(a[i]);
      tb[i] = std::exp(b[i] / 3.0);
    }
    CHECK(kendall_tau(a, b) == kendall_tau(ta, tb));
    const auto r = chi_chibar(a, b, 0.05), t = chi_chibar(ta, tb, 0.05);
    CHECK(r.joint == t.joint);
    CHECK(r.marginal == t.marginal);
    CHECK(r.chi == t.chi);
    CHECK(*r.chibar == *t.chibar);
    CHECK(r.chi >= static_cast<double>(r.joint) / static_cast<double>(r.marginal));
  }

  TEST_CASE("PIT values of data from the model look uniform") {
    const auto spec = testing::r1_s0_spec(6, 20000);
    const auto sim = simulate_series(spec);
    const SkewSurgeModel model{build_empirical(sim.series, spec.thresholds), sim.truth};
    auto pit = pit_transform(sim.series, model);
    for (double v : pit) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    std::sort(pit.begin(), pit.end());
    const double n = static_cast<double>(pit.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < pit.size(); ++i)
      ks = std::max({ks, (i + 1) / n - pit[i], pit[i] - i / n});
    INFO("KS statistic ", ks);
    CHECK(ks < 1.358 / std::sqrt(n));

    const auto& r = sim.series.records[0];
    const double u = spec.thresholds[r.month];
    CHECK(model.cdf(u, covariates_of(r)) == eval_body_cdf(model.body, u, r.month, r.peak_tide));
  }

  TEST_CASE("csv writes NA for an undefined chi-bar") {
    DependenceRow row;
    row.pair = "A-B";
    row.margin = "raw";
    row.n = 10;
    row.tau = 0.25;
    row.chi.chi = 0.0;
    std::ostringstream os;
    write_dependence_csv(os, {row});
    CHECK(os.str() == "pair,lag,margin,n,tau,chi,chibar\nA-B,0,raw,10,0.250000,0.000000,NA\n");
  }
}
