#include "skewsurge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace skewsurge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

OptimResult bfgs(const Objective& f, std::vector<double> x0, const OptimOptions& opts,
                 std::span<const double> scale) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  if (!scale.empty()) {
    if (scale.size() != x0.size()) throw std::invalid_argument("bfgs: scale length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) s[i] = scale[static_cast<std::size_t>(i)];
  }

  OptimResult res;
  std::vector<double> xbuf(x0.size()), gbuf(x0.size());
  // Evaluate at scaled point z; returns f and the scaled gradient.
  const auto eval = [&](const Eigen::VectorXd& z, Eigen::VectorXd& gz) {
    for (Eigen::Index i = 0; i < n; ++i) xbuf[static_cast<std::size_t>(i)] = z[i] * s[i];
    ++res.evaluations;
    const double v = f(xbuf, gbuf);
    gz.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) gz[i] = gbuf[static_cast<std::size_t>(i)] * s[i];
    return v;
  };

  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = x0[static_cast<std::size_t>(i)] / s[i];
  Eigen::VectorXd g;
  double fz = eval(z, g);
  if (!std::isfinite(fz) || !g.allFinite()) {
    res.x = std::move(x0);
    res.value = fz;
    res.message = "infeasible start";
    return res;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  constexpr double kMaxStep = 5.0;
  bool first = true;
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (max_abs(g) <= opts.grad_tol * std::max(1.0, std::abs(fz))) {
      res.converged = true;
      res.message = "gradient tolerance";
      break;
    }
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      H.setIdentity();
      p = -g;
      slope = g.dot(p);
    }
    const double pmax = max_abs(p);
    if (pmax > kMaxStep) {
      p *= kMaxStep / pmax;
      slope = g.dot(p);
    }

    double t = 1.0;
    Eigen::VectorXd z_new, g_new;
    double f_new = kInf;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      z_new = z + t * p;
      f_new = eval(z_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fz + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      if (std::isfinite(f_new) && f_new > fz) {
        // Minimizer of the quadratic through f(0), f'(0), f(t), kept within [0.1t, 0.5t].
        const double tq = -slope * t * t / (2.0 * (f_new - fz - slope * t));
        t = std::clamp(tq, 0.1 * t, 0.5 * t);
      } else {
        t *= 0.5;
      }
    }
    if (!accepted) {
      res.converged = max_abs(g) <= 1e3 * opts.grad_tol * std::max(1.0, std::abs(fz));
      res.message = "line search failed";
      break;
    }

    const Eigen::VectorXd step = z_new - z;
    const Eigen::VectorXd dy = g_new - g;
    const double f_old = fz;
    z = z_new;
    g = g_new;
    fz = f_new;

    const double sy = step.dot(dy);
    if (sy > 1e-12 * step.norm() * dy.norm()) {
      if (first) {
        H *= sy / dy.dot(dy);
        first = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * dy;
      H += ((sy + dy.dot(Hy)) * rho * rho) * (step * step.transpose()) -
           rho * (Hy * step.transpose() + step * Hy.transpose());
    }

    if (max_abs(step) <= opts.step_tol * (1.0 + max_abs(z)) &&
        std::abs(f_old - fz) <= opts.step_tol * std::max(1.0, std::abs(fz))) {
      res.converged = max_abs(g) <= 1e3 * opts.grad_tol * std::max(1.0, std::abs(fz));
      res.message = "step tolerance";
      ++res.iterations;
      break;
    }
  }
  if (res.message.empty()) res.message = "iteration limit";

  res.x.resize(x0.size());
  for (Eigen::Index i = 0; i < n; ++i) res.x[static_cast<std::size_t>(i)] = z[i] * s[i];
  res.value = fz;
  return res;
}

OptimResult nelder_mead(const ValueFunction& f, std::vector<double> x0, std::span<const double> step,
                        const OptimOptions& opts) {
  const std::size_t n = x0.size();
  if (step.size() != n) throw std::invalid_argument("nelder_mead: step length mismatch");
  OptimResult res;
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  const auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  const auto along = [&](double coef, std::vector<double>& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coef * (pts[order[n]][k] - centroid[k]);
  };
  for (res.iterations = 0; res.iterations < opts.max_iter * static_cast<int>(n + 1); ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const double best = vals[order[0]], worst = vals[order[n]];
    double spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        spread = std::max(spread, std::abs(pts[order[i]][k] - pts[order[0]][k]) / (1.0 + std::abs(pts[order[0]][k])));
    if (std::isfinite(worst) && std::abs(worst - best) <= opts.grad_tol * std::max(1.0, std::abs(best)) &&
        spread <= std::sqrt(opts.step_tol)) {
      res.converged = true;
      res.message = "simplex collapsed";
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k] / static_cast<double>(n);

    along(-1.0, trial);
    const double fr = eval(trial);
    if (fr < best) {
      along(-2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[order[n]] = trial2;
        vals[order[n]] = fe;
      } else {
        pts[order[n]] = trial;
        vals[order[n]] = fr;
      }
      continue;
    }
    if (fr < vals[order[n - 1]]) {
      pts[order[n]] = trial;
      vals[order[n]] = fr;
      continue;
    }
    along(fr < worst ? -0.5 : 0.5, trial2);
    const double fc = eval(trial2);
    if (fc < std::min(fr, worst)) {
      pts[order[n]] = trial2;
      vals[order[n]] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      auto& p = pts[order[i]];
      for (std::size_t k = 0; k < n; ++k) p[k] = pts[order[0]][k] + 0.5 * (p[k] - pts[order[0]][k]);
      vals[order[i]] = eval(p);
    }
  }
  if (res.message.empty()) res.message = "iteration limit";
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

std::vector<double> default_steps(std::span<const double> x) {
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = std::max(1e-5 * std::abs(x[i]), 1e-6);
  return h;
}

std::vector<double> numeric_gradient(const ValueFunction& f, std::span<const double> x,
                                     std::span<const double> h) {
  std::vector<double> xp(x.begin(), x.end()), g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h[i];
    const double fp = f(xp);
    xp[i] = x[i] - h[i];
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h[i]);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const ValueFunction& f, std::span<const double> x, std::span<const double> h) {
  const std::size_t n = x.size();
  Eigen::MatrixXd H(n, n);
  std::vector<double> xp(x.begin(), x.end());
  const double f0 = f(xp);
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h[i];
    const double fp = f(xp);
    xp[i] = x[i] - h[i];
    const double fm = f(xp);
    xp[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1})
        for (int sj : {1, -1}) {
          xp[i] = x[i] + si * h[i];
          xp[j] = x[j] + sj * h[j];
          acc += si * sj * f(xp);
        }
      xp[i] = x[i];
      xp[j] = x[j];
      H(i, j) = H(j, i) = acc / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, std::span<const double> x, std::span<const double> h) {
  const std::size_t n = x.size();
  Eigen::MatrixXd H(n, n);
  std::vector<double> xp(x.begin(), x.end()), gp(n), gm(n);
  for (std::size_t j = 0; j < n; ++j) {
    xp[j] = x[j] + h[j];
    f(xp, gp);
    xp[j] = x[j] - h[j];
    f(xp, gm);
    xp[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) H(i, j) = (gp[i] - gm[i]) / (2.0 * h[j]);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace skewsurge
