#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dpdate {

/// Objective returning f(x) and writing the gradient into `grad`.
using SmoothObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Stationarity measure used for the stopping test. Receives the point, its
/// optimizer-space gradient and the mask of coordinates pinned at a bound.
using StationarityNorm = std::function<double(
    const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
    const Eigen::Array<bool, Eigen::Dynamic, 1>& pinned)>;

struct MinimizeOptions {
  int max_iter = 500;
  double tol = 1e-8;
  /// Switch to Newton polishing once the stationarity norm falls below this.
  double polish_threshold = 1e-4;
  int max_polish_steps = 30;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  double stationarity = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// BFGS with Armijo backtracking on a box with lower bounds only
/// (-infinity for free coordinates), followed by Newton steps on a
/// finite-difference Hessian of the analytic gradient.
MinimizeResult minimize_bfgs(const SmoothObjective& objective,
                             const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& lower,
                             const StationarityNorm& stationarity,
                             const MinimizeOptions& options = {});

}  // namespace dpdate
