#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewsurge/gpd_tail.hpp"
#include "skewsurge/likelihood.hpp"
#include "skewsurge/optimizer.hpp"
#include "skewsurge/parallel.hpp"

namespace skewsurge {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitConfig {
  RateFamily rate_family = RateFamily::R0;
  ScaleFamily scale_family = ScaleFamily::S0;
  OptimOptions optim{};
  int starts = 5;
  bool use_shape_prior = false;
  ShapePrior prior{};
  int run_length = 4;
  /// Parameters held at the given value instead of estimated (by parameter name).
  std::map<std::string, double> fixed;
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct ParamEstimate {
  std::string name;
  double value = 0.0;
  double se = 0.0;  // NaN when fixed or the Hessian is unusable
  double lo = 0.0;
  double hi = 0.0;
  bool fixed = false;
};

struct Scores {
  double loglik = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = 2k - 2 loglik, BIC = k ln(n) - 2 loglik.
Scores model_scores(double loglik, std::size_t k, std::size_t n);

struct FitResult {
  std::string site_id;
  RateFamily rate_family = RateFamily::R0;
  ScaleFamily scale_family = ScaleFamily::S0;
  TailParams params;
  std::vector<ParamEstimate> estimates;  // rate block, then scale block, then shape
  Scores scores;                         // whole model, n = tidal cycles
  Scores rate_scores;                    // Bernoulli part, n = tidal cycles
  Scores excess_scores;                  // GPD part, n = exceedances
  std::size_t n_exceedances = 0;
  bool shape_prior = false;
  bool converged = false;
  int iterations = 0;
  bool hessian_ok = false;
  std::string message;

  const ParamEstimate& estimate(std::string_view name) const;
};

/// Parameter names of the rate block in vector order.
std::vector<std::string> rate_param_names(RateFamily f);
/// Parameter names of the excess block (scale parameters, then "shape").
std::vector<std::string> excess_param_names(ScaleFamily f);

std::vector<double> rate_to_vector(const RateParams& rp);
RateParams rate_from_vector(RateFamily f, std::span<const double> v, const TideStandardizers& st);
std::vector<double> excess_to_vector(const ScaleParams& sp, double shape);
ScaleParams scale_from_vector(ScaleFamily f, std::span<const double> v);

/// Maximum-likelihood fit of the tail model for one site.
FitResult fit_tail(const TailData& data, const FitConfig& config);

struct CiResult {
  std::vector<double> se;
  std::vector<double> lo;
  std::vector<double> hi;
  bool ok = false;
  std::string message;
};

/// Standard errors and 95% intervals from the Hessian of the negative log-likelihood.
CiResult hessian_ci(const Eigen::MatrixXd& nll_hessian, std::span<const double> estimate);
/// Same, with the Hessian taken by central differences of `nll`.
CiResult hessian_ci(const ValueFunction& nll, std::span<const double> estimate,
                    std::span<const double> steps = {});

struct PooledResult {
  std::vector<std::string> shared;
  std::vector<ParamEstimate> shared_estimates;
  std::vector<FitResult> sites;        // per-site view of the joint optimum
  std::vector<FitResult> untied_sites; // independent per-site fits
  Scores pooled;                       // loglik = sum of per-site loglik at the joint optimum
  Scores untied;
  bool converged = false;
};

/// Joint fit across sites with the named parameters tied equal.
PooledResult fit_pooled(const std::vector<const TailData*>& sites, const std::vector<std::string>& shared,
                        const FitConfig& config);

}  // namespace skewsurge
