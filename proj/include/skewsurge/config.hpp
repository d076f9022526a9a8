#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skewsurge/gpd_tail.hpp"
#include "skewsurge/json_io.hpp"

namespace skewsurge {

/// Settings for one pipeline run. Read from a JSON document; command-line flags override it.
struct RunConfig {
  std::filesystem::path base_dir = ".";  // relative paths resolve against this
  std::filesystem::path gauge_csv;
  std::optional<std::filesystem::path> gmt_csv;
  std::vector<std::string> sites;  // empty: every site in the gauge file
  std::map<std::string, double> detrend_mm_per_year;
  int reference_year = 2017;
  YearScale year_scale{};
  double percentile = 0.95;

  RateFamily rate_family = RateFamily::R0;
  ScaleFamily scale_family = ScaleFamily::S0;
  std::vector<RateFamily> rate_families;    // select; empty: all the data supports
  std::vector<ScaleFamily> scale_families;
  bool shape_prior = false;
  int starts = 5;
  double grad_tol = 1e-6;
  double step_tol = 1e-8;
  int max_iter = 500;

  int run_length = 4;
  std::size_t exi_levels = 30;
  std::vector<double> p_grid = {1e-1, 1e-2, 1e-3, 1e-4};
  std::optional<double> scenario_year;
  std::optional<double> scenario_gmt;

  std::vector<std::string> pool_sites;
  std::vector<std::string> pool_shared;

  double dependence_p = 0.05;
  std::vector<int> lags = {-1, 0, 1};

  Json simulate = Json::object();  // simulation section, parsed by the simulate command

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Canonical JSON used for the config hash (sorted keys, resolved paths).
  nlohmann::json canonical() const;
  std::string hash() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace skewsurge
