#include "skewsurge/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

namespace {

// Number of pairs i<j among runs of equal values in an already grouped sequence.
template <class Eq>
std::int64_t tied_pairs(const std::vector<std::size_t>& idx, Eq eq) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (eq(idx[i - 1], idx[i])) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

}  // namespace

std::vector<DailyValue> daily_maxima(const SiteSeries& series, std::span<const double> values) {
  if (values.size() != series.records.size()) throw std::invalid_argument("values do not match the series length");
  std::map<Day, double> days;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Day d = std::chrono::floor<std::chrono::days>(series.records[i].timestamp);
    auto [it, inserted] = days.emplace(d, values[i]);
    if (!inserted) it->second = std::max(it->second, values[i]);
  }
  std::vector<DailyValue> out;
  out.reserve(days.size());
  for (const auto& [d, v] : days) out.push_back({d, v});
  return out;
}

std::vector<DailyValue> daily_maxima(const SiteSeries& series) {
  std::vector<double> y;
  y.reserve(series.records.size());
  for (const auto& r : series.records) y.push_back(r.skew_surge);
  return daily_maxima(series, y);
}

PairedDailySeries daily_max_pairs(const std::vector<DailyValue>& a, const std::vector<DailyValue>& b, int lag) {
  if (a.empty() || b.empty()) throw std::invalid_argument("daily series must be nonempty");
  PairedDailySeries out;
  out.lag = lag;
  std::size_t j = 0;
  for (const auto& da : a) {
    const Day target = da.day + std::chrono::days(lag);
    while (j < b.size() && b[j].day < target) ++j;
    if (j == b.size()) break;
    if (b[j].day == target) {
      out.dates.push_back(da.day);
      out.a.push_back(da.value);
      out.b.push_back(b[j].value);
    }
  }
  if (out.a.empty()) throw std::invalid_argument(fmt::format("no overlapping days at lag {}", lag));
  return out;
}

PairedDailySeries daily_max_pairs(const SiteSeries& a, const SiteSeries& b, int lag) {
  return daily_max_pairs(daily_maxima(a), daily_maxima(b), lag);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau needs at least two pairs");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j] || (x[i] == x[j] && y[i] < y[j]); });
  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = tied_pairs(idx, [&](std::size_t i, std::size_t j) { return x[i] == x[j]; });
  const std::int64_t n3 = tied_pairs(idx, [&](std::size_t i, std::size_t j) { return x[i] == x[j] && y[i] == y[j]; });

  // Bottom-up merge sort on y, counting inversions (discordant pairs).
  std::int64_t swaps = 0;
  std::vector<std::size_t> buf(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (y[idx[j]] < y[idx[i]]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = idx[j++];
        } else {
          buf[k++] = idx[i++];
        }
      }
      while (i < mid) buf[k++] = idx[i++];
      while (j < hi) buf[k++] = idx[j++];
    }
    idx.swap(buf);
  }
  const std::int64_t n2 = tied_pairs(idx, [&](std::size_t i, std::size_t j) { return y[i] == y[j]; });
  if (n0 == n1 || n0 == n2) throw std::invalid_argument("kendall_tau undefined for a constant margin");
  const std::int64_t num = n0 - n1 - n2 + n3 - 2 * swaps;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

ChiEstimate chi_chibar(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_chibar: length mismatch");
  if (a.empty()) throw std::invalid_argument("chi_chibar: no pairs");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi_chibar: p must be in (0,1)");
  const double qa = quantile(std::vector<double>(a.begin(), a.end()), 1.0 - p);
  const double qb = quantile(std::vector<double>(b.begin(), b.end()), 1.0 - p);
  ChiEstimate r;
  r.n = a.size();
  r.p = p;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > qa) {
      ++r.marginal;
      if (b[i] > qb) ++r.joint;
    }
  }
  if (r.marginal == 0) throw std::invalid_argument("chi_chibar: no exceedances of the marginal quantile");
  r.chi = static_cast<double>(r.joint) / static_cast<double>(r.marginal);
  const double n = static_cast<double>(r.n);
  if (r.joint > 0 && r.joint < r.n && r.marginal < r.n)
    r.chibar = 2.0 * std::log(static_cast<double>(r.marginal) / n) / std::log(static_cast<double>(r.joint) / n) - 1.0;
  return r;
}

std::vector<double> pit_transform(const SiteSeries& series, const SkewSurgeModel& model) {
  std::vector<double> out;
  out.reserve(series.records.size());
  for (const auto& r : series.records) out.push_back(std::clamp(model.cdf(r.skew_surge, covariates_of(r)), 0.0, 1.0));
  return out;
}

DependenceRow dependence_row(const std::string& pair, const std::string& margin, const PairedDailySeries& pairs,
                             double p) {
  DependenceRow row;
  row.pair = pair;
  row.lag = pairs.lag;
  row.margin = margin;
  row.n = pairs.size();
  row.tau = kendall_tau(pairs.a, pairs.b);
  row.chi = chi_chibar(pairs.a, pairs.b, p);
  return row;
}

void write_dependence_csv(std::ostream& os, const std::vector<DependenceRow>& rows) {
  os << "pair,lag,margin,n,tau,chi,chibar\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{:.6f},{:.6f},{}\n", r.pair, r.lag, r.margin, r.n, r.tau, r.chi.chi,
                      r.chi.chibar ? fmt::format("{:.6f}", *r.chi.chibar) : std::string("NA"));
}

}  // namespace skewsurge
