// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <vector>

#include "sim_fixtures.hpp"
#include "skewsurge/empirical_body.hpp"
#include "skewsurge/extremal_index.hpp"
#include "skewsurge/likelihood.hpp"
#include "skewsurge/return_levels.hpp"

namespace {

using namespace skewsurge;

struct Fixture {
  SimOutput sim;
  TailData data;
  SkewSurgeModel model;
  TideSampleCalendar calendar;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const auto spec = testing::r1_s0_spec(3, 200000);
    auto sim = simulate_series(spec);
    auto data = make_tail_data(sim.series, spec.thresholds);
    SkewSurgeModel model{build_empirical(sim.series, spec.thresholds), sim.truth};
    auto calendar = build_calendar(sim.series);
    return Fixture{std::move(sim), std::move(data), std::move(model), std::move(calendar)};
  }();
  return f;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_RateNll(benchmark::State& state) {
  const auto& f = fixture();
  const auto exec = exec_of(state);
  std::vector<double> grad(kRateBaseCount + trend_count(f.sim.truth.rate.family));
  for (auto _ : state) benchmark::DoNotOptimize(rate_nll(f.sim.truth.rate, f.data, exec, grad));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sim.series.records.size()));
}

void BM_ExcessNll(benchmark::State& state) {
  const auto& f = fixture();
  const auto exec = exec_of(state);
  std::vector<double> grad(kScaleBaseCount + trend_count(f.sim.truth.scale.family) + 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(excess_nll(f.sim.truth.scale, f.sim.truth.shape, f.data, std::nullopt, exec, grad));
}

void BM_AnnualMaxCdf(benchmark::State& state) {
  const auto& f = fixture();
  const auto exec = exec_of(state);
  const auto exi = unit_exi();
  for (auto _ : state)
    benchmark::DoNotOptimize(annual_max_cdf(5.0, f.model, exi, f.calendar, CovariateScenario{}, exec));
}

}  // namespace

BENCHMARK(BM_RateNll)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_ExcessNll)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_AnnualMaxCdf)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
