#pragma once

#include <span>
#include <vector>

namespace skewsurge {

/// Runs estimate of the extremal index: clusters / exceedances, where a cluster ends after
/// at least `run_length` consecutive non-exceedances.
double runs_estimate(std::span<const bool> exceed, int run_length);
/// Same, with exceedances defined as values > level.
double runs_estimate(std::span<const double> values, double level, int run_length);

struct ExiModel {
  double v = 0.0;          // curve anchor level (the 0.99 quantile by default)
  double psi = 1.0;        // decay scale, metres
  double theta = 1.0;      // limit as the level grows
  double theta_v = 1.0;    // runs estimate at v
  int run_length = 4;
  std::vector<double> levels;  // empirical grid, ascending
  std::vector<double> runs;    // runs estimates on the grid
  std::vector<double> knot_levels;  // empirical branch: grid levels below v, then v
  std::vector<double> knot_runs;
};

/// 30 equally spaced probabilities between 0.95 and 0.999, mapped to sample quantiles.
std::vector<double> default_level_grid(std::span<const double> values, std::size_t count = 30,
                                       double p_lo = 0.95, double p_hi = 0.999);

/// Least-squares fit of theta - (theta - theta_v) exp(-(y - v)/psi) to runs estimates at grid
/// levels above v, with theta_v <= theta <= 1 and psi > 0.
ExiModel fit_exi_curve(std::span<const double> values, double v, int run_length, std::span<const double> levels);
/// Same, on runs estimates already computed at `levels`.
ExiModel fit_exi_curve(double v, double theta_v, int run_length, std::span<const double> levels,
                       std::span<const double> runs);

/// Linear interpolation of the empirical grid at or below v, parametric curve above; clamped to [0,1].
double eval_exi(const ExiModel& model, double y);

/// Model with theta identically one.
ExiModel unit_exi();

}  // namespace skewsurge
