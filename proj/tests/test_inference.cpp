#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "sim_fixtures.hpp"
#include "skewsurge/inference.hpp"
#include "skewsurge/optimizer.hpp"

using namespace skewsurge;

namespace {

struct Sim {
  SimOutput out;
  TailData data;
};

Sim simulate_r1(std::uint64_t seed, std::size_t n = 50000, double delta = 0.2) {
  auto spec = testing::r1_s0_spec(seed, n);
  spec.rate.deltas = {delta};
  Sim s{simulate_series(spec), {}};
  s.data = make_tail_data(s.out.series, spec.thresholds);
  return s;
}

const Sim& shared_sim() {
  static const Sim s = simulate_r1(3, 30000);
  return s;
}

FitConfig config(RateFamily rf, ScaleFamily sf) {
  FitConfig c;
  c.rate_family = rf;
  c.scale_family = sf;
  return c;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("Gaussian log-likelihood gives the textbook interval") {
    const ValueFunction nll = [](std::span<const double> x) { return (x[0] - 2.0) * (x[0] - 2.0) / (2 * 0.25); };
    const std::vector<double> est = {2.0};
    const auto ci = hessian_ci(nll, est);
    REQUIRE(ci.ok);
    CHECK(ci.se[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(ci.lo[0] == doctest::Approx(1.02).epsilon(1e-3));
    CHECK(ci.hi[0] == doctest::Approx(2.98).epsilon(1e-3));
    CHECK(0.5 * (ci.lo[0] + ci.hi[0]) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("non-positive-definite Hessian is reported") {
    Eigen::MatrixXd H(2, 2);
    H << 1.0, 2.0, 2.0, 1.0;
    const std::vector<double> est = {0.0, 0.0};
    CHECK_FALSE(hessian_ci(H, est).ok);
  }

  TEST_CASE("information criteria") {
    const auto s = model_scores(-100.0, 3, 100);
    CHECK(s.aic == 206.0);
    CHECK(s.bic == doctest::Approx(213.816).epsilon(1e-5));
  }

  TEST_CASE("fit reports consistent scores and a stationary point") {
    const auto& sim = shared_sim();
    const auto fr = fit_tail(sim.data, config(RateFamily::R1, ScaleFamily::S0));
    CHECK(fr.converged);
    CHECK(fr.hessian_ok);
    CHECK(fr.scores.aic == doctest::Approx(2.0 * fr.scores.k - 2.0 * fr.scores.loglik).epsilon(1e-14));
    CHECK(fr.scores.bic ==
          doctest::Approx(fr.scores.k * std::log(double(fr.scores.n)) - 2.0 * fr.scores.loglik).epsilon(1e-14));
    CHECK(fr.scores.k == 12);
    CHECK(fr.scores.n == sim.data.n_cycles());
    CHECK(fr.excess_scores.n == sim.data.n_exceedances());
    CHECK(fr.scores.loglik == doctest::Approx(fr.rate_scores.loglik + fr.excess_scores.loglik).epsilon(1e-12));
    CHECK(-fr.scores.loglik == doctest::Approx(neg_loglik(fr.params, sim.data)).epsilon(1e-12));

    // Central-difference gradient at the optimum, scaled by the standard errors.
    const auto x = rate_to_vector(fr.params.rate);
    const auto st = fr.params.rate.standardizers;
    const auto g = numeric_gradient(
        [&](std::span<const double> v) { return rate_nll(rate_from_vector(RateFamily::R1, v, st), sim.data); }, x,
        default_steps(x));
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(g[k] * fr.estimates[k].se) < 1e-3);
    const auto xe = excess_to_vector(fr.params.scale, fr.params.shape);
    const auto ge = numeric_gradient(
        [&](std::span<const double> v) { return excess_nll(scale_from_vector(ScaleFamily::S0, v), v.back(), sim.data); },
        xe, default_steps(xe));
    for (std::size_t k = 0; k < xe.size(); ++k) CHECK(std::abs(ge[k] * fr.estimates[x.size() + k].se) < 1e-3);

    for (const auto& e : fr.estimates) {
      CHECK(e.lo < e.value);
      CHECK(e.value < e.hi);
      CHECK(0.5 * (e.lo + e.hi) == doctest::Approx(e.value).epsilon(1e-12));
    }
    const double phase = fr.estimate("phase_day").value;
    CHECK(phase >= 0.0);
    CHECK(phase < 365.0);
  }

  TEST_CASE("larger families never lose likelihood") {
    const auto& sim = shared_sim();
    double prev = -INFINITY;
    for (auto rf : {RateFamily::R0, RateFamily::R1, RateFamily::R2}) {
      const double l = fit_tail(sim.data, config(rf, ScaleFamily::S0)).rate_scores.loglik;
      CHECK(l >= prev - 1e-6);
      prev = l;
    }
    prev = -INFINITY;
    for (auto sf : {ScaleFamily::S0, ScaleFamily::S1, ScaleFamily::S2}) {
      const double l = fit_tail(sim.data, config(RateFamily::R0, sf)).excess_scores.loglik;
      CHECK(l >= prev - 1e-6);
      prev = l;
    }
  }

  TEST_CASE("R1 with the trend frozen at zero reproduces R0") {
    const auto& sim = shared_sim();
    auto frozen = config(RateFamily::R1, ScaleFamily::S0);
    frozen.fixed["delta_rate_year"] = 0.0;
    const auto a = fit_tail(sim.data, frozen);
    const auto b = fit_tail(sim.data, config(RateFamily::R0, ScaleFamily::S0));
    CHECK(a.scores.loglik == doctest::Approx(b.scores.loglik).epsilon(1e-9));
    CHECK(a.scores.k == b.scores.k);
    CHECK(a.estimate("delta_rate_year").fixed);
    CHECK(std::isnan(a.estimate("delta_rate_year").se));
  }

  TEST_CASE("shape prior pulls a small-sample estimate toward its mean") {
    auto spec = testing::r1_s0_spec(21, 4000);
    spec.shape = 0.25;
    const auto out = simulate_series(spec);
    const auto data = make_tail_data(out.series, spec.thresholds);
    REQUIRE(data.n_exceedances() >= 150);
    REQUIRE(data.n_exceedances() <= 260);
    auto with = config(RateFamily::R1, ScaleFamily::S0);
    with.use_shape_prior = true;
    const auto a = fit_tail(data, with);
    const auto b = fit_tail(data, config(RateFamily::R1, ScaleFamily::S0));
    CHECK(a.shape_prior);
    CHECK(std::abs(a.params.shape - 0.0119) <= std::abs(b.params.shape - 0.0119));
  }

  TEST_CASE("interval width matches the expected-information width") {
    const auto sim = simulate_r1(8, 50000, 0.215);
    const auto fr = fit_tail(sim.data, config(RateFamily::R1, ScaleFamily::S0));
    REQUIRE(fr.hessian_ok);

    // Expected Fisher information of the Bernoulli part at the planted parameters.
    const auto& rp = sim.out.truth.rate;
    const double w = 2 * M_PI / 365.0;
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(7, 7);
    for (const auto& r : sim.out.series.records) {
      const double dj = r.day_of_month - rp.standardizers.mean_day_of_month[static_cast<std::size_t>(r.month - 1)];
      const double xs = (r.peak_tide - rp.standardizers.tide_mean) / rp.standardizers.tide_sd;
      Eigen::VectorXd g(7);
      g << 1.0, dj * std::sin(w * (r.day_of_year - rp.phase_day)),
          -w * dj * rp.beta_day * std::cos(w * (r.day_of_year - rp.phase_day)), xs,
          xs * std::sin(w * (r.day_of_year - rp.phase_tide)),
          -w * xs * rp.beta_tide * std::cos(w * (r.day_of_year - rp.phase_tide)), r.year_std;
      const double lam = rate_at(rp, r.day_of_year, r.day_of_month, r.month, r.peak_tide, r.year_std, r.gmt);
      info += lam * (1 - lam) * g * g.transpose();
    }
    const double analytic_se = std::sqrt(info.inverse()(6, 6));
    const double ratio = fr.estimate("delta_rate_year").se / analytic_se;
    INFO("hessian se / expected-information se = ", ratio);
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }

  TEST_CASE("too few exceedances is a fit error") {
    const auto sim = simulate_r1(2, 600);
    REQUIRE(sim.data.n_exceedances() < 50);
    CHECK_THROWS_AS(fit_tail(sim.data, config(RateFamily::R0, ScaleFamily::S0)), FitError);
  }

  TEST_CASE("config validation") {
    FitConfig c;
    c.starts = 0;
    CHECK_THROWS(c.validate());
    FitConfig bad_fixed;
    bad_fixed.fixed["delta_rate_year"] = 0.0;
    CHECK_THROWS(fit_tail(shared_sim().data, bad_fixed));
  }

  TEST_CASE("pooling one site is the single-site fit") {
    const auto& sim = shared_sim();
    const auto cfg = config(RateFamily::R1, ScaleFamily::S0);
    const auto single = fit_tail(sim.data, cfg);
    const auto pooled = fit_pooled({&sim.data}, {"delta_rate_year"}, cfg);
    REQUIRE(pooled.sites.size() == 1);
    CHECK(pooled.pooled.loglik == doctest::Approx(single.scores.loglik).epsilon(1e-9));
    for (std::size_t k = 0; k < single.estimates.size(); ++k)
      CHECK(pooled.sites[0].estimates[k].value ==
            doctest::Approx(single.estimates[k].value).epsilon(1e-5).scale(1.0));
  }

  TEST_CASE("parameter names") {
    CHECK(rate_param_names(RateFamily::R2).size() == 10);
    CHECK(rate_param_names(RateFamily::R2)[6] == "delta_rate_year_winter");
    CHECK(excess_param_names(ScaleFamily::S3).back() == "shape");
    CHECK(excess_param_names(ScaleFamily::S3)[4] == "delta_scale_gmt");
  }
}
