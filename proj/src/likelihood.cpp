#include "skewsurge/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOmega = 2.0 * std::numbers::pi / kDaysPerYear;

// log(1 + e^eta) without overflow.
inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

struct TrendView {
  const std::vector<double>* values = nullptr;  // covariate column, null for no trend
  bool seasonal = false;
};

TrendView rate_trend(RateFamily f, const TailData& d) {
  switch (trend_covariate(f)) {
    case Covariate::none: return {};
    case Covariate::year: return {&d.year_std, trend_count(f) == 4};
    case Covariate::gmt: return {&d.gmt, trend_count(f) == 4};
  }
  return {};
}

TrendView scale_trend(ScaleFamily f, const TailData& d) {
  switch (trend_covariate(f)) {
    case Covariate::none: return {};
    case Covariate::year: return {&d.year_std, trend_count(f) == 4};
    case Covariate::gmt: return {&d.gmt, trend_count(f) == 4};
  }
  return {};
}

}  // namespace

double ShapePrior::neg_log_density(double xi) const {
  return 0.5 * std::log(2.0 * std::numbers::pi * variance) + 0.5 * (xi - mean) * (xi - mean) / variance;
}

TailData make_tail_data(const SiteSeries& series, const MonthlyThresholds& thresholds) {
  TailData d;
  d.site_id = series.site_id;
  d.thresholds = thresholds;
  d.standardizers = tide_standardizers(series);
  const std::size_t n = series.records.size();
  d.sin_day.reserve(n);
  d.cos_day.reserve(n);
  d.month.reserve(n);
  d.day_of_month.reserve(n);
  d.season.reserve(n);
  d.tide.reserve(n);
  d.year_std.reserve(n);
  d.gmt.reserve(n);
  d.exceed.reserve(n);
  d.has_year = true;
  d.has_gmt = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = series.records[i];
    const double a = kOmega * r.day_of_year;
    d.sin_day.push_back(std::sin(a));
    d.cos_day.push_back(std::cos(a));
    d.month.push_back(static_cast<std::uint8_t>(r.month));
    d.day_of_month.push_back(static_cast<std::uint8_t>(r.day_of_month));
    d.season.push_back(static_cast<std::uint8_t>(r.season()));
    d.tide.push_back(r.peak_tide);
    d.year_std.push_back(r.year_std);
    d.gmt.push_back(r.gmt);
    d.has_year = d.has_year && std::isfinite(r.year_std);
    d.has_gmt = d.has_gmt && std::isfinite(r.gmt);
    const double u = thresholds[r.month];
    const bool ex = r.skew_surge > u;
    d.exceed.push_back(ex ? 1 : 0);
    if (ex) {
      d.exceed_index.push_back(static_cast<std::uint32_t>(i));
      d.excess.push_back(r.skew_surge - u);
    }
  }
  return d;
}

void require_covariates(const TailData& data, RateFamily rf, ScaleFamily sf) {
  const auto need = [&](Covariate c, std::string_view fam) {
    if (c == Covariate::year && !data.has_year)
      throw std::invalid_argument(fmt::format("site {}: family {} needs the standardized-year covariate",
                                              data.site_id, fam));
    if (c == Covariate::gmt && !data.has_gmt)
      throw std::invalid_argument(fmt::format("site {}: family {} needs the GMT covariate", data.site_id, fam));
  };
  need(trend_covariate(rf), to_string(rf));
  need(trend_covariate(sf), to_string(sf));
}

double rate_nll(const RateParams& rp, const TailData& data, Exec exec, std::span<double> grad) {
  const std::size_t nt = trend_count(rp.family);
  const std::size_t dim = kRateBaseCount + nt;
  if (!grad.empty() && grad.size() != dim)
    throw std::invalid_argument(fmt::format("rate gradient needs {} slots", dim));
  if (rp.deltas.size() != nt) throw std::invalid_argument("rate trend coefficient count mismatch");
  if (!(rp.lambda > 0.0 && rp.lambda < 1.0) || !(rp.beta_day > 0.0) || !(rp.beta_tide > 0.0)) return kInf;
  const auto& st = rp.standardizers;
  if (!(st.tide_sd > 0.0)) throw std::domain_error("tide standard deviation must be positive");
  const TrendView trend = rate_trend(rp.family, data);
  if (trend.values == &data.year_std && !data.has_year)
    throw std::invalid_argument("rate family needs the standardized-year covariate");
  if (trend.values == &data.gmt && !data.has_gmt)
    throw std::invalid_argument("rate family needs the GMT covariate");

  const double base = std::log(rp.lambda / (1.0 - rp.lambda));
  const double cpd = std::cos(kOmega * rp.phase_day), spd = std::sin(kOmega * rp.phase_day);
  const double cpx = std::cos(kOmega * rp.phase_tide), spx = std::sin(kOmega * rp.phase_tide);
  const double inv_sd = 1.0 / st.tide_sd;
  std::array<double, 12> dbar{};
  for (std::size_t m = 0; m < 12; ++m) dbar[m] = st.mean_day_of_month[m];
  const double* dl = rp.deltas.data();
  const double* cov = trend.values ? trend.values->data() : nullptr;

  const auto eta_at = [&](std::size_t i, double& dj, double& xs, double& s_d, double& s_x,
                          double& c_d, double& c_x, double& tv) {
    const double sa = data.sin_day[i], ca = data.cos_day[i];
    s_d = sa * cpd - ca * spd;  // sin(a - phase_day)
    c_d = ca * cpd + sa * spd;
    s_x = sa * cpx - ca * spx;
    c_x = ca * cpx + sa * spx;
    dj = data.day_of_month[i] - dbar[data.month[i] - 1u];
    xs = (data.tide[i] - st.tide_mean) * inv_sd;
    tv = cov ? cov[i] : 0.0;
    double eta = base + dj * rp.beta_day * s_d + xs * (rp.alpha_tide + rp.beta_tide * s_x);
    if (cov) eta += (trend.seasonal ? dl[data.season[i]] : dl[0]) * tv;
    return eta;
  };

  const std::size_t n = data.n_cycles();
  if (grad.empty()) {
    return reduce_sum(exec, n, [&](std::size_t i) {
      double dj, xs, s_d, s_x, c_d, c_x, tv;
      const double eta = eta_at(i, dj, xs, s_d, s_x, c_d, c_x, tv);
      return softplus(eta) - (data.exceed[i] ? eta : 0.0);
    });
  }

  // Slot 0 holds the value; slots 1.. the gradient.
  std::vector<double> acc;
  reduce_vector(exec, n, dim + 1, acc, [&](std::size_t i, double* out) {
    double dj, xs, s_d, s_x, c_d, c_x, tv;
    const double eta = eta_at(i, dj, xs, s_d, s_x, c_d, c_x, tv);
    const double ex = data.exceed[i] ? 1.0 : 0.0;
    out[0] += softplus(eta) - ex * eta;
    const double r = sigmoid(eta) - ex;  // d nll / d eta
    out[1] += r;                         // scaled by d eta / d lambda below
    out[2] += r * dj * s_d;
    out[3] += r * dj * rp.beta_day * c_d;  // times -omega below
    out[4] += r * xs;
    out[5] += r * xs * s_x;
    out[6] += r * xs * rp.beta_tide * c_x;  // times -omega below
    if (cov) out[7 + (trend.seasonal ? data.season[i] : 0u)] += r * tv;
  });
  grad[0] = acc[1] / (rp.lambda * (1.0 - rp.lambda));
  grad[1] = acc[2];
  grad[2] = -kOmega * acc[3];
  grad[3] = acc[4];
  grad[4] = acc[5];
  grad[5] = -kOmega * acc[6];
  for (std::size_t k = 0; k < nt; ++k) grad[kRateBaseCount + k] = acc[7 + k];
  return acc[0];
}

double excess_nll(const ScaleParams& sp, double xi, const TailData& data,
                  const std::optional<ShapePrior>& prior, Exec exec, std::span<double> grad) {
  const std::size_t nt = trend_count(sp.family);
  const std::size_t dim = kScaleBaseCount + nt + 1;
  if (!grad.empty() && grad.size() != dim)
    throw std::invalid_argument(fmt::format("excess gradient needs {} slots", dim));
  if (sp.deltas.size() != nt) throw std::invalid_argument("scale trend coefficient count mismatch");
  if (!(sp.beta > 0.0) || !(sp.alpha > sp.beta) || !std::isfinite(xi)) return kInf;
  const TrendView trend = scale_trend(sp.family, data);
  if (trend.values == &data.year_std && !data.has_year)
    throw std::invalid_argument("scale family needs the standardized-year covariate");
  if (trend.values == &data.gmt && !data.has_gmt)
    throw std::invalid_argument("scale family needs the GMT covariate");

  const double cp = std::cos(kOmega * sp.phase), spp = std::sin(kOmega * sp.phase);
  const double* dl = sp.deltas.data();
  const double* cov = trend.values ? trend.values->data() : nullptr;
  const bool exp_limit = std::abs(xi) < kShapeZeroTol;
  const bool series_xi = std::abs(xi) < 1e-5;

  // Per-exceedance term; returns +inf when outside the support.
  const auto term = [&](std::size_t k, double* out) {
    const std::size_t i = data.exceed_index[k];
    const double sa = data.sin_day[i], ca = data.cos_day[i];
    const double s = sa * cp - ca * spp;
    const double c = ca * cp + sa * spp;
    const double tv = cov ? cov[i] : 0.0;
    double sigma = sp.alpha + sp.beta * s + sp.gamma * data.tide[i];
    if (cov) sigma += (trend.seasonal ? dl[data.season[i]] : dl[0]) * tv;
    const double e = data.excess[k];
    if (!(sigma > 0.0)) return kInf;
    const double z = e / sigma;
    double value, d_sigma, d_xi;
    if (exp_limit) {
      value = std::log(sigma) + z;
      d_sigma = (1.0 - z) / sigma;
      d_xi = z - 0.5 * z * z;
    } else {
      const double t = xi * z;
      if (t <= -1.0) return kInf;
      const double l1p = std::log1p(t);
      value = std::log(sigma) + (1.0 + 1.0 / xi) * l1p;
      d_sigma = (1.0 - (1.0 + xi) * z / (1.0 + t)) / sigma;
      d_xi = series_xi ? (z - 0.5 * z * z) + 2.0 * xi * (z * z * z / 3.0 - 0.5 * z * z)
                       : -l1p / (xi * xi) + (1.0 + xi) * z / (xi * (1.0 + t));
    }
    if (out) {
      out[1] += d_sigma;
      out[2] += d_sigma * s;
      out[3] += d_sigma * c;  // times -omega * beta below
      out[4] += d_sigma * data.tide[i];
      if (cov) out[5 + (trend.seasonal ? data.season[i] : 0u)] += d_sigma * tv;
      out[5 + nt] += d_xi;
    }
    return value;
  };

  const std::size_t n = data.n_exceedances();
  double total;
  if (grad.empty()) {
    total = reduce_sum(exec, n, [&](std::size_t k) { return term(k, nullptr); });
  } else {
    std::vector<double> acc;
    reduce_vector(exec, n, dim + 1, acc, [&](std::size_t k, double* out) { out[0] += term(k, out); });
    total = acc[0];
    grad[0] = acc[1];
    grad[1] = acc[2];
    grad[2] = -kOmega * sp.beta * acc[3];
    grad[3] = acc[4];
    for (std::size_t k = 0; k < nt; ++k) grad[kScaleBaseCount + k] = acc[5 + k];
    grad[kScaleBaseCount + nt] = acc[5 + nt];
  }
  if (!std::isfinite(total)) return kInf;
  if (prior) {
    total += prior->neg_log_density(xi);
    if (!grad.empty()) grad[kScaleBaseCount + nt] += prior->neg_log_density_derivative(xi);
  }
  return total;
}

double neg_loglik(const TailParams& params, const TailData& data, const std::optional<ShapePrior>& prior,
                  Exec exec) {
  const double r = rate_nll(params.rate, data, exec);
  if (!std::isfinite(r)) return kInf;
  const double e = excess_nll(params.scale, params.shape, data, prior, exec);
  if (!std::isfinite(e)) return kInf;
  return r + e;
}

}  // namespace skewsurge
