#include "skewsurge/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "skewsurge/random.hpp"

namespace skewsurge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMinExceedances = 50;
constexpr std::array<double, 4> kPhaseGrid = {0.0, 91.0, 182.0, 273.0};

std::vector<std::string> trend_names(std::string_view block, Covariate cov, std::size_t count) {
  if (count == 0) return {};
  const std::string base = fmt::format("delta_{}_{}", block, cov == Covariate::year ? "year" : "gmt");
  if (count == 1) return {base};
  std::vector<std::string> out;
  for (int s = 0; s < 4; ++s) out.push_back(fmt::format("{}_{}", base, season_name(static_cast<Season>(s))));
  return out;
}

bool is_phase(const std::string& name) { return name.rfind("phase", 0) == 0; }

double wrap_phase(double p) {
  double w = std::fmod(p, kDaysPerYear);
  if (w < 0.0) w += kDaysPerYear;
  return w;
}

enum class BlockKind { rate, excess };

struct SiteBlock {
  const TailData* data = nullptr;
  std::vector<std::string> names;
  std::vector<double> local;  // fixed entries hold their fixed values
  std::vector<int> map;       // local index -> joint index, -1 when fixed
};

struct JointBlock {
  BlockKind kind = BlockKind::rate;
  RateFamily rf = RateFamily::R0;
  ScaleFamily sf = ScaleFamily::S0;
  std::optional<ShapePrior> prior;
  Exec exec = Exec::parallel;
  std::vector<SiteBlock> sites;
  std::vector<std::string> names;

  std::size_t dim() const { return names.size(); }

  std::vector<double> local_of(std::size_t s, std::span<const double> x) const {
    std::vector<double> v = sites[s].local;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (sites[s].map[i] >= 0) v[i] = x[static_cast<std::size_t>(sites[s].map[i])];
    return v;
  }

  double site_nll(std::size_t s, std::span<const double> v, std::span<double> grad) const {
    const TailData& d = *sites[s].data;
    if (kind == BlockKind::rate) return rate_nll(rate_from_vector(rf, v, d.standardizers), d, exec, grad);
    return excess_nll(scale_from_vector(sf, v), v.back(), d, std::nullopt, exec, grad);
  }

  double prior_term(std::span<const double> x, std::span<double> grad) const {
    if (!prior || kind != BlockKind::excess) return 0.0;
    double total = 0.0;
    std::set<int> seen;
    for (const auto& sb : sites) {
      const int j = sb.map.back();
      if (j >= 0 && !seen.insert(j).second) continue;
      const double xi = j >= 0 ? x[static_cast<std::size_t>(j)] : sb.local.back();
      total += prior->neg_log_density(xi);
      if (j >= 0 && !grad.empty()) grad[static_cast<std::size_t>(j)] += prior->neg_log_density_derivative(xi);
    }
    return total;
  }

  double eval(std::span<const double> x, std::span<double> grad) const {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    std::vector<double> lg;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      const auto v = local_of(s, x);
      if (!grad.empty()) lg.assign(v.size(), 0.0);
      const double f = site_nll(s, v, grad.empty() ? std::span<double>{} : std::span<double>(lg));
      if (!std::isfinite(f)) return kInf;
      total += f;
      if (!grad.empty())
        for (std::size_t i = 0; i < v.size(); ++i)
          if (sites[s].map[i] >= 0) grad[static_cast<std::size_t>(sites[s].map[i])] += lg[i];
    }
    return total + prior_term(x, grad);
  }
};

struct BlockFit {
  std::vector<double> x;
  double value = kInf;
  bool converged = false;
  int iterations = 0;
  CiResult ci;
  std::string message;
};

std::vector<double> scales_from_hessian(const Eigen::MatrixXd& H, std::span<const double> x,
                                        const std::vector<std::string>& names) {
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (std::isfinite(h) && h > 0.0)
      s[i] = 1.0 / std::sqrt(h);
    else
      s[i] = is_phase(names[i]) ? 20.0 : std::max(0.1 * std::abs(x[i]), 0.01);
  }
  return s;
}

// Difference steps tied to the parameter scale, kept small relative to the value.
std::vector<double> hessian_steps(std::span<const double> scale, std::span<const double> x) {
  std::vector<double> h(scale.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = 1e-3 * scale[i];
    if (std::abs(x[i]) > 0.0) h[i] = std::min(h[i], 1e-2 * std::abs(x[i]));
    h[i] = std::max(h[i], 1e-9);
  }
  return h;
}

BlockFit fit_joint(const JointBlock& jb, std::vector<double> x0, const FitConfig& cfg, std::uint64_t stream) {
  const Objective obj = [&](std::span<const double> x, std::span<double> g) { return jb.eval(x, g); };
  const std::size_t n = jb.dim();
  BlockFit best;
  if (n == 0) {
    best.x = {};
    best.value = jb.eval({}, {});
    best.converged = std::isfinite(best.value);
    best.ci.ok = true;
    best.message = "no free parameters";
    return best;
  }
  if (!std::isfinite(obj(x0, {}))) throw FitError("initial values are infeasible");

  const auto scale0 = scales_from_hessian(numeric_hessian(obj, x0, default_steps(x0)), x0, jb.names);
  Rng rng(mix_seed(cfg.seed, stream));
  int best_index = -1;
  for (int k = 0; k < cfg.starts; ++k) {
    std::vector<double> start = x0;
    if (k > 0) {
      for (int attempt = 0; attempt < 20; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) {
          const double u = 2.0 * uniform01(rng) - 1.0;
          start[i] = std::abs(x0[i]) > 1e-8 ? x0[i] * (1.0 + 0.2 * u) : 0.2 * u * scale0[i];
        }
        if (std::isfinite(obj(start, {}))) break;
        start = x0;
      }
    }
    OptimResult r = bfgs(obj, start, cfg.optim, scale0);
    int iters = r.iterations;
    if (!r.converged && std::isfinite(r.value)) {
      const ValueFunction vf = [&](std::span<const double> x) { return jb.eval(x, {}); };
      const OptimResult nm = nelder_mead(vf, r.x, scale0, cfg.optim);
      r = bfgs(obj, nm.x, cfg.optim, scale0);
      iters += nm.iterations + r.iterations;
    }
    if (r.converged && r.value < best.value) {
      best.x = r.x;
      best.value = r.value;
      best.converged = true;
      best.iterations = iters;
      best.message = r.message;
      best_index = k;
    }
  }
  if (best_index < 0) throw FitError(fmt::format("all {} starts failed to converge", cfg.starts));

  for (std::size_t i = 0; i < n; ++i)
    if (is_phase(jb.names[i])) best.x[i] = wrap_phase(best.x[i]);
  best.value = obj(best.x, {});

  // Newton polish with the finite-difference Hessian of the analytic gradient.
  auto scale = scale0;
  Eigen::MatrixXd H;
  std::vector<double> g(n);
  for (int it = 0; it < 4; ++it) {
    H = numeric_hessian(obj, best.x, hessian_steps(scale, best.x));
    if (!H.allFinite()) break;
    scale = scales_from_hessian(H, best.x, jb.names);
    obj(best.x, g);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd dx = -llt.solve(Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(n)));
    std::vector<double> xn(best.x);
    double rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xn[i] += dx[static_cast<Eigen::Index>(i)];
      rel = std::max(rel, std::abs(dx[static_cast<Eigen::Index>(i)]) / scale[i]);
    }
    const double fn = obj(xn, {});
    if (!(fn <= best.value)) break;
    best.x = std::move(xn);
    best.value = fn;
    if (rel < 1e-8) break;
  }
  H = numeric_hessian(obj, best.x, hessian_steps(scale, best.x));
  best.ci = hessian_ci(H, best.x);
  return best;
}

std::vector<double> rate_initial(const TailData& d, RateFamily rf, const std::map<std::string, double>& fixed) {
  const auto names = rate_param_names(rf);
  std::vector<double> v(names.size(), 0.0);
  const double frac = static_cast<double>(d.n_exceedances()) / static_cast<double>(d.n_cycles());
  v[0] = std::clamp(frac, 1e-4, 0.5);
  v[1] = 0.02;
  v[4] = 0.1;
  const auto apply_fixed = [&] {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (auto it = fixed.find(names[i]); it != fixed.end()) v[i] = it->second;
  };
  apply_fixed();
  double best = kInf;
  std::vector<double> best_v = v;
  for (double pd : kPhaseGrid)
    for (double px : kPhaseGrid) {
      v[2] = pd;
      v[5] = px;
      apply_fixed();
      const double f = rate_nll(rate_from_vector(rf, v, d.standardizers), d, Exec::parallel);
      if (f < best) {
        best = f;
        best_v = v;
      }
    }
  return best_v;
}

std::vector<double> excess_initial(const TailData& d, ScaleFamily sf, const std::map<std::string, double>& fixed) {
  const auto names = excess_param_names(sf);
  std::vector<double> v(names.size(), 0.0);
  const auto& e = d.excess;
  const double m = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
  double var = 0.0;
  for (double x : e) var += (x - m) * (x - m);
  var /= static_cast<double>(e.size() - 1);
  double xi = var > 0.0 ? 0.5 * (1.0 - m * m / var) : 0.0;
  xi = std::clamp(xi, -0.4, 0.4);
  const double sigma = var > 0.0 ? 0.5 * m * (m * m / var + 1.0) : m;
  v[0] = std::max(sigma, 0.02);
  v[1] = 0.01;
  v.back() = xi;
  const auto apply_fixed = [&] {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (auto it = fixed.find(names[i]); it != fixed.end()) v[i] = it->second;
  };
  apply_fixed();
  // Excesses near the GPD endpoint make negative shape starts infeasible; back off toward 0.
  for (int k = 0; k < 20 && !std::isfinite(excess_nll(scale_from_vector(sf, v), v.back(), d)); ++k) {
    if (!fixed.contains("shape")) v.back() *= 0.5;
    if (!fixed.contains("alpha_scale")) v[0] *= 1.2;
  }
  double best = kInf;
  std::vector<double> best_v = v;
  for (double p : kPhaseGrid) {
    v[2] = p;
    apply_fixed();
    const double f = excess_nll(scale_from_vector(sf, v), v.back(), d);
    if (f < best) {
      best = f;
      best_v = v;
    }
  }
  return best_v;
}

JointBlock make_joint(BlockKind kind, const std::vector<const TailData*>& sites, const std::set<std::string>& shared,
                      const FitConfig& cfg, std::vector<double>& x0) {
  JointBlock jb;
  jb.kind = kind;
  jb.rf = cfg.rate_family;
  jb.sf = cfg.scale_family;
  jb.exec = cfg.exec;
  if (cfg.use_shape_prior) jb.prior = cfg.prior;
  const auto names = kind == BlockKind::rate ? rate_param_names(cfg.rate_family) : excess_param_names(cfg.scale_family);
  std::map<std::string, int> shared_index;
  x0.clear();
  for (const TailData* d : sites) {
    SiteBlock sb;
    sb.data = d;
    sb.names = names;
    sb.local = kind == BlockKind::rate ? rate_initial(*d, cfg.rate_family, cfg.fixed)
                                       : excess_initial(*d, cfg.scale_family, cfg.fixed);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (cfg.fixed.contains(names[i])) {
        sb.map.push_back(-1);
      } else if (shared.contains(names[i]) && shared_index.contains(names[i])) {
        sb.map.push_back(shared_index[names[i]]);
      } else {
        const int j = static_cast<int>(jb.names.size());
        sb.map.push_back(j);
        x0.push_back(sb.local[i]);
        if (shared.contains(names[i]) || sites.size() == 1) {
          jb.names.push_back(names[i]);
          if (shared.contains(names[i])) shared_index[names[i]] = j;
        } else {
          jb.names.push_back(fmt::format("{}:{}", d->site_id, names[i]));
        }
      }
    }
    jb.sites.push_back(std::move(sb));
  }
  return jb;
}

struct SiteFits {
  std::vector<FitResult> sites;
  JointBlock rate, excess;
  BlockFit rate_fit, excess_fit;
};

SiteFits fit_sites(const std::vector<const TailData*>& sites, const std::vector<std::string>& shared_names,
                   const FitConfig& cfg) {
  cfg.validate();
  if (sites.empty()) throw std::invalid_argument("no sites to fit");
  const std::set<std::string> shared(shared_names.begin(), shared_names.end());
  const auto rnames = rate_param_names(cfg.rate_family);
  const auto enames = excess_param_names(cfg.scale_family);
  for (const auto& s : shared)
    if (std::find(rnames.begin(), rnames.end(), s) == rnames.end() &&
        std::find(enames.begin(), enames.end(), s) == enames.end())
      throw std::invalid_argument(fmt::format("shared parameter '{}' is not part of families {}/{}", s,
                                              to_string(cfg.rate_family), to_string(cfg.scale_family)));
  for (const auto& [name, value] : cfg.fixed)
    if (std::find(rnames.begin(), rnames.end(), name) == rnames.end() &&
        std::find(enames.begin(), enames.end(), name) == enames.end())
      throw std::invalid_argument(fmt::format("fixed parameter '{}' is not part of families {}/{}", name,
                                              to_string(cfg.rate_family), to_string(cfg.scale_family)));
  for (const TailData* d : sites) {
    require_covariates(*d, cfg.rate_family, cfg.scale_family);
    if (d->n_exceedances() < kMinExceedances)
      throw FitError(fmt::format("site {}: {} threshold exceedances, need at least {}", d->site_id,
                                 d->n_exceedances(), kMinExceedances));
  }

  SiteFits out;
  std::vector<double> x0;
  out.rate = make_joint(BlockKind::rate, sites, shared, cfg, x0);
  out.rate_fit = fit_joint(out.rate, x0, cfg, 0);
  out.excess = make_joint(BlockKind::excess, sites, shared, cfg, x0);
  out.excess_fit = fit_joint(out.excess, x0, cfg, 1);

  for (std::size_t s = 0; s < sites.size(); ++s) {
    const TailData& d = *sites[s];
    FitResult fr;
    fr.site_id = d.site_id;
    fr.rate_family = cfg.rate_family;
    fr.scale_family = cfg.scale_family;
    fr.shape_prior = cfg.use_shape_prior;
    fr.n_exceedances = d.n_exceedances();
    const auto rv = out.rate.local_of(s, out.rate_fit.x);
    const auto ev = out.excess.local_of(s, out.excess_fit.x);
    fr.params.rate = rate_from_vector(cfg.rate_family, rv, d.standardizers);
    fr.params.scale = scale_from_vector(cfg.scale_family, ev);
    fr.params.shape = ev.back();

    std::size_t k_rate = 0, k_excess = 0;
    const auto add = [&](const SiteBlock& sb, const std::vector<double>& v, const BlockFit& bf, std::size_t& k) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        ParamEstimate pe{sb.names[i], v[i], kNaN, kNaN, kNaN, sb.map[i] < 0};
        if (!pe.fixed) {
          ++k;
          const auto j = static_cast<std::size_t>(sb.map[i]);
          if (bf.ci.ok) {
            pe.se = bf.ci.se[j];
            pe.lo = bf.ci.lo[j];
            pe.hi = bf.ci.hi[j];
          }
        }
        fr.estimates.push_back(std::move(pe));
      }
    };
    add(out.rate.sites[s], rv, out.rate_fit, k_rate);
    add(out.excess.sites[s], ev, out.excess_fit, k_excess);

    const double l_rate = -out.rate.site_nll(s, rv, {});
    const double l_excess = -out.excess.site_nll(s, ev, {});
    fr.rate_scores = model_scores(l_rate, k_rate, d.n_cycles());
    fr.excess_scores = model_scores(l_excess, k_excess, d.n_exceedances());
    fr.scores = model_scores(l_rate + l_excess, k_rate + k_excess, d.n_cycles());
    fr.converged = out.rate_fit.converged && out.excess_fit.converged;
    fr.iterations = out.rate_fit.iterations + out.excess_fit.iterations;
    fr.hessian_ok = out.rate_fit.ci.ok && out.excess_fit.ci.ok;
    fr.message = fr.hessian_ok ? out.rate_fit.message
                               : fmt::format("{}; {}", out.rate_fit.ci.ok ? "" : out.rate_fit.ci.message,
                                             out.excess_fit.ci.ok ? "" : out.excess_fit.ci.message);
    out.sites.push_back(std::move(fr));
  }
  return out;
}

}  // namespace

void FitConfig::validate() const {
  if (!(optim.grad_tol > 0.0) || !(optim.step_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (optim.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (starts < 1) throw std::invalid_argument("need at least one start");
  if (!(prior.variance > 0.0)) throw std::invalid_argument("shape prior variance must be positive");
  if (run_length < 1) throw std::invalid_argument("run length must be at least 1");
}

Scores model_scores(double loglik, std::size_t k, std::size_t n) {
  Scores s{loglik, k, n, 0.0, 0.0};
  s.aic = 2.0 * static_cast<double>(k) - 2.0 * loglik;
  s.bic = static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglik;
  return s;
}

const ParamEstimate& FitResult::estimate(std::string_view name) const {
  for (const auto& e : estimates)
    if (e.name == name) return e;
  throw std::out_of_range(fmt::format("no parameter named '{}'", name));
}

std::vector<std::string> rate_param_names(RateFamily f) {
  std::vector<std::string> n = {"lambda", "beta_day", "phase_day", "alpha_tide", "beta_tide", "phase_tide"};
  for (auto& t : trend_names("rate", trend_covariate(f), trend_count(f))) n.push_back(std::move(t));
  return n;
}

std::vector<std::string> excess_param_names(ScaleFamily f) {
  std::vector<std::string> n = {"alpha_scale", "beta_scale", "phase_scale", "gamma_scale"};
  for (auto& t : trend_names("scale", trend_covariate(f), trend_count(f))) n.push_back(std::move(t));
  n.push_back("shape");
  return n;
}

std::vector<double> rate_to_vector(const RateParams& rp) {
  std::vector<double> v = {rp.lambda, rp.beta_day, rp.phase_day, rp.alpha_tide, rp.beta_tide, rp.phase_tide};
  v.insert(v.end(), rp.deltas.begin(), rp.deltas.end());
  return v;
}

RateParams rate_from_vector(RateFamily f, std::span<const double> v, const TideStandardizers& st) {
  if (v.size() != kRateBaseCount + trend_count(f)) throw std::invalid_argument("rate vector length mismatch");
  RateParams rp;
  rp.family = f;
  rp.lambda = v[0];
  rp.beta_day = v[1];
  rp.phase_day = v[2];
  rp.alpha_tide = v[3];
  rp.beta_tide = v[4];
  rp.phase_tide = v[5];
  rp.deltas.assign(v.begin() + kRateBaseCount, v.end());
  rp.standardizers = st;
  return rp;
}

std::vector<double> excess_to_vector(const ScaleParams& sp, double shape) {
  std::vector<double> v = {sp.alpha, sp.beta, sp.phase, sp.gamma};
  v.insert(v.end(), sp.deltas.begin(), sp.deltas.end());
  v.push_back(shape);
  return v;
}

ScaleParams scale_from_vector(ScaleFamily f, std::span<const double> v) {
  if (v.size() != kScaleBaseCount + trend_count(f) + 1) throw std::invalid_argument("scale vector length mismatch");
  ScaleParams sp;
  sp.family = f;
  sp.alpha = v[0];
  sp.beta = v[1];
  sp.phase = v[2];
  sp.gamma = v[3];
  sp.deltas.assign(v.begin() + kScaleBaseCount, v.end() - 1);
  return sp;
}

CiResult hessian_ci(const Eigen::MatrixXd& H, std::span<const double> estimate) {
  const auto n = static_cast<Eigen::Index>(estimate.size());
  CiResult r;
  r.se.assign(estimate.size(), kNaN);
  r.lo.assign(estimate.size(), kNaN);
  r.hi.assign(estimate.size(), kNaN);
  if (H.rows() != n || H.cols() != n) throw std::invalid_argument("hessian size mismatch");
  if (!H.allFinite()) {
    r.message = "hessian has non-finite entries";
    return r;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    r.message = "hessian is not positive definite";
    return r;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    r.se[k] = std::sqrt(cov(i, i));
    r.lo[k] = estimate[k] - 1.96 * r.se[k];
    r.hi[k] = estimate[k] + 1.96 * r.se[k];
  }
  r.ok = true;
  return r;
}

CiResult hessian_ci(const ValueFunction& nll, std::span<const double> estimate, std::span<const double> steps) {
  const auto h = steps.empty() ? default_steps(estimate) : std::vector<double>(steps.begin(), steps.end());
  return hessian_ci(numeric_hessian(nll, estimate, h), estimate);
}

FitResult fit_tail(const TailData& data, const FitConfig& config) {
  return std::move(fit_sites({&data}, {}, config).sites.front());
}

PooledResult fit_pooled(const std::vector<const TailData*>& sites, const std::vector<std::string>& shared,
                        const FitConfig& config) {
  SiteFits joint = fit_sites(sites, shared, config);
  PooledResult out;
  out.shared = shared;
  for (const auto& name : shared) {
    for (const auto* jb : {&joint.rate, &joint.excess}) {
      const auto it = std::find(jb->names.begin(), jb->names.end(), name);
      if (it == jb->names.end()) continue;
      const auto j = static_cast<std::size_t>(it - jb->names.begin());
      const BlockFit& bf = jb == &joint.rate ? joint.rate_fit : joint.excess_fit;
      out.shared_estimates.push_back({name, bf.x[j], bf.ci.ok ? bf.ci.se[j] : kNaN,
                                      bf.ci.ok ? bf.ci.lo[j] : kNaN, bf.ci.ok ? bf.ci.hi[j] : kNaN, false});
    }
    if (config.fixed.contains(name)) out.shared_estimates.push_back({name, config.fixed.at(name), kNaN, kNaN, kNaN, true});
  }

  double loglik = 0.0;
  std::size_t n = 0;
  for (const auto& fr : joint.sites) {
    loglik += fr.scores.loglik;
    n += fr.scores.n;
  }
  out.pooled = model_scores(loglik, joint.rate.dim() + joint.excess.dim(), n);
  out.converged = joint.rate_fit.converged && joint.excess_fit.converged;
  out.sites = std::move(joint.sites);

  double ul = 0.0;
  std::size_t uk = 0;
  for (const TailData* d : sites) {
    out.untied_sites.push_back(fit_tail(*d, config));
    ul += out.untied_sites.back().scores.loglik;
    uk += out.untied_sites.back().scores.k;
  }
  out.untied = model_scores(ul, uk, n);
  return out;
}

}  // namespace skewsurge
