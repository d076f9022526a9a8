#include "skewsurge/extremal_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "skewsurge/core_data.hpp"

namespace skewsurge {

namespace {

struct CurveFit {
  double theta;
  double sse;
};

// Closed-form theta for a fixed psi, clamped to [theta_v, 1].
CurveFit fit_theta(double psi, double v, double theta_v, std::span<const double> y, std::span<const double> r) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = std::exp(-(y[i] - v) / psi);
    num += (1.0 - e) * (r[i] - theta_v * e);
    den += (1.0 - e) * (1.0 - e);
  }
  const double theta = std::clamp(den > 0.0 ? num / den : theta_v, theta_v, 1.0);
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = std::exp(-(y[i] - v) / psi);
    const double d = r[i] - (theta - (theta - theta_v) * e);
    sse += d * d;
  }
  return {theta, sse};
}

template <class Pred>
double runs_of(std::size_t n, Pred exceeds, int run_length) {
  if (run_length < 1) throw std::invalid_argument("run length must be at least 1");
  std::size_t exceedances = 0, clusters = 0, gap = 0;
  bool seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (exceeds(i)) {
      if (!seen || gap >= static_cast<std::size_t>(run_length)) ++clusters;
      ++exceedances;
      seen = true;
      gap = 0;
    } else {
      ++gap;
    }
  }
  if (exceedances == 0) throw std::invalid_argument("runs estimate needs at least one exceedance");
  return static_cast<double>(clusters) / static_cast<double>(exceedances);
}

}  // namespace

double runs_estimate(std::span<const bool> exceed, int run_length) {
  return runs_of(exceed.size(), [&](std::size_t i) { return exceed[i]; }, run_length);
}

double runs_estimate(std::span<const double> values, double level, int run_length) {
  return runs_of(values.size(), [&](std::size_t i) { return values[i] > level; }, run_length);
}

std::vector<double> default_level_grid(std::span<const double> values, std::size_t count, double p_lo, double p_hi) {
  if (count < 2) throw std::invalid_argument("level grid needs at least two levels");
  if (values.empty()) throw std::invalid_argument("level grid needs data");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double p = p_lo + (p_hi - p_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = quantile_sorted(sorted, p);
  }
  return out;
}

ExiModel fit_exi_curve(std::span<const double> values, double v, int run_length, std::span<const double> levels) {
  if (values.empty()) throw std::invalid_argument("no data for the extremal index");
  const double vmax = *std::max_element(values.begin(), values.end());
  if (!(v < vmax)) throw std::invalid_argument(fmt::format("level v={} is not below the maximum {}", v, vmax));
  const double theta_v = runs_estimate(values, v, run_length);
  std::vector<double> used, runs;
  for (double y : levels) {
    if (!(y < vmax)) continue;
    used.push_back(y);
    runs.push_back(runs_estimate(values, y, run_length));
  }
  return fit_exi_curve(v, theta_v, run_length, used, runs);
}

ExiModel fit_exi_curve(double v, double theta_v, int run_length, std::span<const double> levels,
                       std::span<const double> runs) {
  if (levels.size() != runs.size()) throw std::invalid_argument("levels and runs estimates differ in length");
  ExiModel m;
  m.v = v;
  m.theta_v = theta_v;
  m.run_length = run_length;
  std::vector<std::size_t> order(levels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });
  std::vector<double> y, r;
  for (std::size_t i : order) {
    m.levels.push_back(levels[i]);
    m.runs.push_back(runs[i]);
    if (levels[i] > v) {
      y.push_back(levels[i]);
      r.push_back(runs[i]);
    } else if (levels[i] < v) {
      m.knot_levels.push_back(levels[i]);
      m.knot_runs.push_back(runs[i]);
    }
  }
  m.knot_levels.push_back(v);
  m.knot_runs.push_back(theta_v);
  if (y.size() < 3)
    throw std::invalid_argument(fmt::format("extremal index fit needs 3 grid levels above v, got {}", y.size()));

  const double span = y.back() - v;
  const double lo = std::log(span * 1e-4), hi = std::log(span * 1e4);
  constexpr int kGrid = 400;
  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    const double lp = lo + (hi - lo) * k / kGrid;
    const double sse = fit_theta(std::exp(lp), v, theta_v, y, r).sse;
    if (sse < best) {
      best = sse;
      best_k = k;
    }
  }
  const double step = (hi - lo) / kGrid;
  double a = lo + step * std::max(best_k - 1, 0), b = lo + step * std::min(best_k + 1, kGrid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = fit_theta(std::exp(c), v, theta_v, y, r).sse, fd = fit_theta(std::exp(d), v, theta_v, y, r).sse;
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fit_theta(std::exp(c), v, theta_v, y, r).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fit_theta(std::exp(d), v, theta_v, y, r).sse;
    }
  }
  m.psi = std::exp(0.5 * (a + b));
  m.theta = fit_theta(m.psi, v, theta_v, y, r).theta;
  return m;
}

double eval_exi(const ExiModel& m, double y) {
  double out;
  if (y > m.v) {
    out = m.theta - (m.theta - m.theta_v) * std::exp(-(y - m.v) / m.psi);
  } else {
    const auto& xs = m.knot_levels;
    const auto& ys = m.knot_runs;
    if (xs.empty()) return std::clamp(m.theta_v, 0.0, 1.0);
    if (y <= xs.front()) {
      out = ys.front();
    } else {
      const auto it = std::lower_bound(xs.begin(), xs.end(), y);
      const auto k = static_cast<std::size_t>(it - xs.begin());
      const double t = (y - xs[k - 1]) / (xs[k] - xs[k - 1]);
      out = ys[k - 1] + t * (ys[k] - ys[k - 1]);
    }
  }
  return std::clamp(out, 0.0, 1.0);
}

ExiModel unit_exi() {
  ExiModel m;
  m.v = -std::numeric_limits<double>::infinity();
  m.theta = 1.0;
  m.theta_v = 1.0;
  return m;
}

}  // namespace skewsurge
