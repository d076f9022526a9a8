#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace skewsurge {

/// Objective returning f(x); when `grad` is non-empty it also fills the gradient.
/// Infeasible points return +inf.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;
using ValueFunction = std::function<double(std::span<const double> x)>;

struct OptimOptions {
  double grad_tol = 1e-6;  // on the scaled gradient, relative to max(1, |f|)
  double step_tol = 1e-8;  // on the scaled step, relative to 1 + max |z|
  int max_iter = 500;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
};

/// Quasi-Newton minimization in scaled coordinates z = x / scale.
/// `scale` defaults to all ones; a good choice is 1/sqrt(diag Hessian).
OptimResult bfgs(const Objective& f, std::vector<double> x0, const OptimOptions& opts,
                 std::span<const double> scale = {});

/// Derivative-free simplex search; `step` gives the initial simplex edge per coordinate.
OptimResult nelder_mead(const ValueFunction& f, std::vector<double> x0, std::span<const double> step,
                        const OptimOptions& opts);

/// Central-difference gradient with per-coordinate steps.
std::vector<double> numeric_gradient(const ValueFunction& f, std::span<const double> x,
                                     std::span<const double> h);

/// Central-difference Hessian of f from function values only.
Eigen::MatrixXd numeric_hessian(const ValueFunction& f, std::span<const double> x, std::span<const double> h);

/// Central differences of an analytic gradient, symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& f, std::span<const double> x, std::span<const double> h);

/// Default difference steps: max(1e-5 |x_i|, 1e-6).
std::vector<double> default_steps(std::span<const double> x);

}  // namespace skewsurge
