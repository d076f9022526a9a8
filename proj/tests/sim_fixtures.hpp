#pragma once

#include <cmath>

#include "skewsurge/core_data.hpp"
#include "skewsurge/simulate.hpp"

namespace skewsurge::testing {

/// Thresholds with a gentle seasonal cycle (higher in winter).
inline MonthlyThresholds seasonal_thresholds() {
  MonthlyThresholds t;
  for (int m = 1; m <= 12; ++m) t.u[static_cast<std::size_t>(m - 1)] = 0.16 + 0.04 * std::cos(2.0 * M_PI * (m - 1) / 12.0);
  return t;
}

/// 50,000 cycles from R1/S0 with lambda 0.05 and delta 0.2.
inline SimSpec r1_s0_spec(std::uint64_t seed, std::size_t n_cycles = 50000) {
  SimSpec s;
  s.n_cycles = n_cycles;
  s.seed = seed;
  s.thresholds = seasonal_thresholds();
  s.rate.family = RateFamily::R1;
  s.rate.lambda = 0.05;
  s.rate.beta_day = 0.03;
  s.rate.phase_day = 40.0;
  s.rate.alpha_tide = 0.3;
  s.rate.beta_tide = 0.3;
  s.rate.phase_tide = 150.0;
  s.rate.deltas = {0.2};
  s.scale.family = ScaleFamily::S0;
  s.scale.alpha = 0.12;
  s.scale.beta = 0.04;
  s.scale.phase = 300.0;
  s.scale.gamma = 0.01;
  s.shape = 0.05;
  return s;
}

/// Linear GMT path from -0.4 degC in 1950 rising 1.3 degC over the 50,000-cycle span.
inline GmtSeries linear_gmt(int first = 1940, int last = 2040) {
  std::map<int, double> m;
  for (int y = first; y <= last; ++y) m[y] = -0.4 + 1.3 * (y - 1950) / 68.0;
  return GmtSeries(std::move(m));
}

}  // namespace skewsurge::testing
