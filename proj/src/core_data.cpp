#include "skewsurge/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace skewsurge {

namespace {

constexpr std::array<int, 12> kMonthStart = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
constexpr std::array<int, 12> kMonthLength = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

int parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, bool& ok) {
  if (pos + len > s.size()) {
    ok = false;
    return 0;
  }
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') {
      ok = false;
      return 0;
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

Season season_of_month(int month) {
  switch (month) {
    case 12: case 1: case 2: return Season::winter;
    case 3: case 4: case 5: return Season::spring;
    case 6: case 7: case 8: return Season::summer;
    case 9: case 10: case 11: return Season::autumn;
    default: throw std::out_of_range(fmt::format("month {} out of range", month));
  }
}

std::string_view season_name(Season s) {
  switch (s) {
    case Season::winter: return "winter";
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::autumn: return "autumn";
  }
  return "?";
}

int day_of_year_365(int month, int day_of_month) {
  if (month < 1 || month > 12) throw std::out_of_range(fmt::format("month {} out of range", month));
  const auto m = static_cast<std::size_t>(month - 1);
  const int max_day = month == 2 ? 29 : kMonthLength[m];
  if (day_of_month < 1 || day_of_month > max_day)
    throw std::out_of_range(fmt::format("day {} out of range for month {}", day_of_month, month));
  return kMonthStart[m] + std::min(day_of_month, kMonthLength[m]);
}

int month_of_day_of_year(int day_of_year) {
  if (day_of_year < 1 || day_of_year > 365)
    throw std::out_of_range(fmt::format("day of year {} out of range", day_of_year));
  int m = 11;
  while (day_of_year <= kMonthStart[static_cast<std::size_t>(m)]) --m;
  return m + 1;
}

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM[:SS][Z]
  using namespace std::chrono;
  text = trim(text);
  bool ok = text.size() >= 16 && text[4] == '-' && text[7] == '-' &&
            (text[10] == 'T' || text[10] == ' ') && text[13] == ':';
  const int y = parse_fixed_int(text, 0, 4, ok);
  const int mo = parse_fixed_int(text, 5, 2, ok);
  const int d = parse_fixed_int(text, 8, 2, ok);
  const int hh = parse_fixed_int(text, 11, 2, ok);
  const int mm = parse_fixed_int(text, 14, 2, ok);
  int ss = 0;
  std::size_t pos = 16;
  if (ok && pos < text.size() && text[pos] == ':') {
    ss = parse_fixed_int(text, pos + 1, 2, ok);
    pos += 3;
  }
  if (ok && pos < text.size() && text[pos] == 'Z') ++pos;
  if (!ok || pos != text.size())
    throw DataError(fmt::format("malformed timestamp '{}'", text));
  if (mo < 1 || mo > 12) throw DataError(fmt::format("month out of range in timestamp '{}'", text));
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60)
    throw DataError(fmt::format("invalid date/time in timestamp '{}'", text));
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

TidalCycleRecord make_record(Timestamp t, double peak_tide, std::optional<double> max_sea_level,
                             std::optional<double> skew_surge) {
  using namespace std::chrono;
  TidalCycleRecord r;
  r.timestamp = t;
  const year_month_day ymd{floor<days>(t)};
  r.year = static_cast<int>(ymd.year());
  r.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  r.day_of_month = static_cast<int>(static_cast<unsigned>(ymd.day()));
  r.day_of_year = day_of_year_365(r.month, r.day_of_month);
  r.peak_tide = peak_tide;
  r.max_sea_level = max_sea_level;
  if (max_sea_level && skew_surge) {
    if (std::abs(*skew_surge - (*max_sea_level - peak_tide)) > 1e-9)
      throw DataError(fmt::format("skew surge {} inconsistent with level {} - tide {}", *skew_surge,
                                  *max_sea_level, peak_tide));
    r.skew_surge = *skew_surge;
  } else if (max_sea_level) {
    r.skew_surge = *max_sea_level - peak_tide;
  } else if (skew_surge) {
    r.skew_surge = *skew_surge;
  } else {
    throw DataError("record needs a max sea level or a skew surge");
  }
  return r;
}

double GmtSeries::at(int year) const {
  const auto it = anomalies_.find(year);
  if (it == anomalies_.end()) throw DataError(fmt::format("GMT series has no value for year {}", year));
  return it->second;
}

GmtSeries GmtSeries::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open GMT file '{}'", path.string()));
  std::map<int, double> values;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_csv(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() >= 2 && fields[0] == "year") continue;
    }
    const auto year = parse_double(fields.empty() ? std::string_view{} : fields[0]);
    const auto value = fields.size() == 2 ? parse_double(fields[1]) : std::nullopt;
    if (!year || !value || *year != std::floor(*year))
      throw DataError(fmt::format("{}:{}: malformed GMT row '{}'", path.string(), lineno, view));
    if (!values.emplace(static_cast<int>(*year), *value).second)
      throw DataError(fmt::format("{}:{}: duplicate GMT year {}", path.string(), lineno, *year));
  }
  if (values.empty()) throw DataError(fmt::format("{}: no records", path.string()));
  return GmtSeries(std::move(values));
}

void GmtSeries::write_csv(std::ostream& os) const {
  os << "year,anomaly_c\n";
  for (const auto& [year, v] : anomalies_) os << fmt::format("{},{}\n", year, v);
}

namespace {

std::map<std::string, SiteSeries> parse_all(std::istream& in, std::string_view site,
                                            std::string_view source) {
  std::map<std::string, SiteSeries> all;
  std::map<std::string, std::vector<std::size_t>> line_of;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  bool has_surge_column = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_csv(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 4 || fields.size() > 5 || fields[0] != "site" || fields[1] != "timestamp" ||
          fields[2] != "peak_tide_m" || fields[3] != "max_sea_level_m" ||
          (fields.size() == 5 && fields[4] != "skew_surge_m"))
        throw DataError(fmt::format(
            "{}:{}: expected header site,timestamp,peak_tide_m,max_sea_level_m[,skew_surge_m]",
            source, lineno));
      has_surge_column = fields.size() == 5;
      continue;
    }
    const auto bad = [&](std::string_view why) {
      return DataError(fmt::format("{}:{}: malformed row ({}): '{}'", source, lineno, why, view));
    };
    if (fields.size() != 4 && !(has_surge_column && fields.size() == 5)) throw bad("column count");
    if (fields[0].empty()) throw bad("empty site");
    if (!site.empty() && fields[0] != site) continue;
    Timestamp t;
    try {
      t = parse_timestamp(fields[1]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source, lineno, e.what()));
    }
    const auto tide = parse_double(fields[2]);
    if (!tide) throw bad("peak tide");
    const auto level = parse_double(fields[3]);
    if (!fields[3].empty() && !level) throw bad("max sea level");
    std::optional<double> surge;
    if (fields.size() == 5) {
      surge = parse_double(fields[4]);
      if (!fields[4].empty() && !surge) throw bad("skew surge");
    }
    TidalCycleRecord rec;
    try {
      rec = make_record(t, *tide, level, surge);
    } catch (const DataError& e) {
      throw bad(e.what());
    }
    auto& s = all[std::string(fields[0])];
    s.site_id = std::string(fields[0]);
    s.records.push_back(rec);
    line_of[s.site_id].push_back(lineno);
  }
  if (all.empty()) throw DataError(fmt::format("{}: no records", source));

  for (auto& [id, series] : all) {
    const auto& lines = line_of[id];
    std::vector<std::size_t> order(series.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return series.records[a].timestamp < series.records[b].timestamp;
    });
    std::vector<TidalCycleRecord> sorted;
    sorted.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0 && series.records[order[k]].timestamp == series.records[order[k - 1]].timestamp)
        throw DataError(fmt::format("{}: duplicate timestamp {} for site {} (lines {} and {})", source,
                                    format_timestamp(series.records[order[k]].timestamp), id,
                                    lines[order[k - 1]], lines[order[k]]));
      sorted.push_back(series.records[order[k]]);
    }
    series.records = std::move(sorted);
  }
  return all;
}

}  // namespace

SiteSeries parse_series(std::istream& in, std::string_view site, std::string_view source) {
  auto all = parse_all(in, site, source);
  if (site.empty() && all.size() > 1)
    throw DataError(fmt::format("{}: file holds {} sites; choose one", source, all.size()));
  return std::move(all.begin()->second);
}

std::map<std::string, SiteSeries> load_sites(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open gauge file '{}'", path.string()));
  return parse_all(in, {}, path.string());
}

SiteSeries load_series(const std::filesystem::path& path, std::string_view site) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open gauge file '{}'", path.string()));
  return parse_series(in, site, path.string());
}

void write_series_csv(std::ostream& os, const SiteSeries& series) {
  os << "site,timestamp,peak_tide_m,max_sea_level_m,skew_surge_m\n";
  for (const auto& r : series.records) {
    os << fmt::format("{},{},{},{},{}\n", series.site_id, format_timestamp(r.timestamp), r.peak_tide,
                      r.max_sea_level ? fmt::format("{}", *r.max_sea_level) : std::string{},
                      r.skew_surge);
  }
}

SiteSeries detrend_msl(SiteSeries series, double rate_mm_per_year, int reference_year) {
  if (!std::isfinite(rate_mm_per_year)) throw std::invalid_argument("detrend rate must be finite");
  for (auto& r : series.records) {
    const double offset = rate_mm_per_year * static_cast<double>(reference_year - r.year) / 1000.0;
    if (r.max_sea_level) {
      r.max_sea_level = *r.max_sea_level + offset;
      r.skew_surge = *r.max_sea_level - r.peak_tide;
    } else {
      r.skew_surge += offset;
    }
  }
  series.msl_trend_rate += rate_mm_per_year;
  series.reference_year = reference_year;
  return series;
}

double standardize_year(double year, double mid, double half) {
  if (!(half > 0.0)) throw std::invalid_argument("year standardization half-range must be positive");
  return (year - mid) / half;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probability outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

MonthlyThresholds monthly_thresholds(const SiteSeries& series, double percentile) {
  if (!(percentile > 0.0 && percentile < 1.0))
    throw std::invalid_argument("threshold percentile must lie in (0,1)");
  std::array<std::vector<double>, 12> by_month;
  for (const auto& r : series.records) by_month[static_cast<std::size_t>(r.month - 1)].push_back(r.skew_surge);
  MonthlyThresholds out;
  out.percentile = percentile;
  for (std::size_t m = 0; m < 12; ++m) {
    if (by_month[m].size() < kMinMonthlyObservations)
      throw DataError(fmt::format("site {}: month {} has {} skew surges; at least {} needed",
                                  series.site_id, m + 1, by_month[m].size(), kMinMonthlyObservations));
    out.u[m] = quantile(std::move(by_month[m]), percentile);
  }
  return out;
}

SiteSeries attach_covariates(SiteSeries series, const GmtSeries& gmt, const YearScale& scale) {
  for (auto& r : series.records) {
    if (!gmt.contains(r.year))
      throw DataError(fmt::format("GMT series is missing year {} (site {})", r.year, series.site_id));
    r.year_std = standardize_year(r.year, scale);
    r.gmt = gmt.at(r.year);
  }
  return series;
}

SiteSeries attach_covariates(SiteSeries series, const YearScale& scale) {
  for (auto& r : series.records) r.year_std = standardize_year(r.year, scale);
  return series;
}

}  // namespace skewsurge
