#include "skewsurge/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace skewsurge {

namespace {

const std::set<std::string> kKeys = {
    "gauge_csv",   "gmt_csv",      "sites",          "detrend_mm_per_year", "reference_year", "year_scale",
    "percentile",  "rate_family",  "scale_family",   "rate_families",       "scale_families", "shape_prior",
    "starts",      "grad_tol",     "step_tol",       "max_iter",            "run_length",     "exi_levels",
    "p_grid",      "scenario",     "pool",           "dependence",          "simulate",       "output_dir",
    "seed"};

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

nlohmann::json RunConfig::canonical() const {
  nlohmann::json j;
  j["gauge_csv"] = gauge_csv.generic_string();
  j["gmt_csv"] = gmt_csv ? nlohmann::json(gmt_csv->generic_string()) : nlohmann::json(nullptr);
  j["sites"] = sites;
  j["detrend_mm_per_year"] = detrend_mm_per_year;
  j["reference_year"] = reference_year;
  j["year_scale"] = {{"mid", year_scale.mid}, {"half", year_scale.half}};
  j["percentile"] = percentile;
  j["rate_family"] = std::string(to_string(rate_family));
  j["scale_family"] = std::string(to_string(scale_family));
  std::vector<std::string> rf, sf;
  for (auto f : rate_families) rf.emplace_back(to_string(f));
  for (auto f : scale_families) sf.emplace_back(to_string(f));
  j["rate_families"] = rf;
  j["scale_families"] = sf;
  j["shape_prior"] = shape_prior;
  j["starts"] = starts;
  j["grad_tol"] = grad_tol;
  j["step_tol"] = step_tol;
  j["max_iter"] = max_iter;
  j["run_length"] = run_length;
  j["exi_levels"] = exi_levels;
  j["p_grid"] = p_grid;
  j["scenario"] = {{"year", scenario_year ? nlohmann::json(*scenario_year) : nlohmann::json(nullptr)},
                   {"gmt", scenario_gmt ? nlohmann::json(*scenario_gmt) : nlohmann::json(nullptr)}};
  j["pool"] = {{"sites", pool_sites}, {"shared", pool_shared}};
  j["dependence"] = {{"p", dependence_p}, {"lags", lags}};
  j["simulate"] = nlohmann::json::parse(simulate.dump());
  j["output_dir"] = output_dir.generic_string();
  j["seed"] = seed;
  return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical().dump()); }

void RunConfig::validate() const {
  if (!(percentile > 0.5 && percentile < 1.0))
    throw std::invalid_argument(fmt::format("percentile {} must lie in (0.5, 1)", percentile));
  if (!(year_scale.half > 0.0)) throw std::invalid_argument("year_scale.half must be positive");
  if (starts < 1) throw std::invalid_argument("starts must be at least 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (run_length < 1) throw std::invalid_argument("run_length must be at least 1");
  if (exi_levels < 3) throw std::invalid_argument("exi_levels must be at least 3");
  for (double p : p_grid)
    if (!(p >= 1e-6 && p <= 0.5)) throw std::invalid_argument(fmt::format("p_grid value {} outside [1e-6, 0.5]", p));
  if (!(dependence_p > 0.0 && dependence_p < 1.0)) throw std::invalid_argument("dependence.p must lie in (0,1)");
}

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.contains(key)) throw std::invalid_argument(fmt::format("unknown config key '{}'", key));

  RunConfig c;
  c.base_dir = base_dir;
  if (j.contains("gauge_csv")) c.gauge_csv = j.at("gauge_csv").get<std::string>();
  if (j.contains("gmt_csv") && !j.at("gmt_csv").is_null()) c.gmt_csv = j.at("gmt_csv").get<std::string>();
  read(j, "sites", c.sites);
  read(j, "detrend_mm_per_year", c.detrend_mm_per_year);
  read(j, "reference_year", c.reference_year);
  if (j.contains("year_scale")) {
    read(j.at("year_scale"), "mid", c.year_scale.mid);
    read(j.at("year_scale"), "half", c.year_scale.half);
  }
  read(j, "percentile", c.percentile);
  if (j.contains("rate_family")) c.rate_family = parse_rate_family(j.at("rate_family").get<std::string>());
  if (j.contains("scale_family")) c.scale_family = parse_scale_family(j.at("scale_family").get<std::string>());
  if (j.contains("rate_families"))
    for (const auto& f : j.at("rate_families")) c.rate_families.push_back(parse_rate_family(f.get<std::string>()));
  if (j.contains("scale_families"))
    for (const auto& f : j.at("scale_families")) c.scale_families.push_back(parse_scale_family(f.get<std::string>()));
  read(j, "shape_prior", c.shape_prior);
  read(j, "starts", c.starts);
  read(j, "grad_tol", c.grad_tol);
  read(j, "step_tol", c.step_tol);
  read(j, "max_iter", c.max_iter);
  read(j, "run_length", c.run_length);
  read(j, "exi_levels", c.exi_levels);
  read(j, "p_grid", c.p_grid);
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    if (s.contains("year") && !s.at("year").is_null()) c.scenario_year = s.at("year").get<double>();
    if (s.contains("gmt") && !s.at("gmt").is_null()) c.scenario_gmt = s.at("gmt").get<double>();
  }
  if (j.contains("pool")) {
    read(j.at("pool"), "sites", c.pool_sites);
    read(j.at("pool"), "shared", c.pool_shared);
  }
  if (j.contains("dependence")) {
    read(j.at("dependence"), "p", c.dependence_p);
    read(j.at("dependence"), "lags", c.lags);
  }
  if (j.contains("simulate")) c.simulate = Json::parse(j.at("simulate").dump());
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  read(j, "seed", c.seed);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config file {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config {}: {}", path.string(), e.what()));
  }
  return config_from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace skewsurge
