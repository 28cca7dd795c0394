#pragma once

// Minimum density power divergence (DPD) estimation for the linear model
//   y_t = beta' x_t + sigma * e_t,   e_t ~ f  (mean 0, variance 1),
// where x_t = (1, controls_t). The objective at tuning parameter alpha > 0 is
//   H(beta, sigma) = sigma^-alpha [ M_f(alpha)
//                      - (1 + 1/alpha) mean_t f((y_t - beta' x_t) / sigma)^alpha ],
// with M_f(alpha) = integral of f^(1+alpha). alpha = 0 is least squares.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "dpdate/density.hpp"

namespace dpdate {

/// Pre-treatment design: X is T1 x N with a leading column of ones, y the
/// treated unit's responses.
struct DesignResponse {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  /// Validates shape, the intercept column and the conditioning of X'X.
  static DesignResponse make(Eigen::MatrixXd X, Eigen::VectorXd y);

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
};

struct RegressionParams {
  Eigen::VectorXd beta;  // (intercept, slopes)
  double sigma2 = 1.0;
};

struct FitOptions {
  std::optional<RegressionParams> init;
  int max_iter = 500;
  double tol = 1e-8;
  /// Number of starting points; 0 picks 5 for alpha >= 0.5 and 1 otherwise.
  int multistart_count = 0;
  std::uint64_t multistart_seed = 0x5eed5eedULL;
};

struct RegressionFit {
  RegressionParams params;
  double alpha = 0.0;
  double objective_value = 0.0;
  double gradient_norm = 0.0;
  /// Asymptotic covariance of (beta_hat, sigma2_hat), already divided by T1.
  Eigen::MatrixXd vcov;
  bool converged = false;
  int iterations = 0;
  int starts = 1;
};

/// Reciprocal condition number of X'X below this is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

/// Throws SingularDesign when X'X fails the conditioning check.
void check_design_rank(const Eigen::MatrixXd& X);

double dpd_objective(const DesignResponse& data, const RegressionParams& params,
                     double alpha, const ErrorDensity& f);

/// Analytic gradient of dpd_objective with respect to (beta, sigma).
Eigen::VectorXd dpd_gradient(const DesignResponse& data,
                             const RegressionParams& params, double alpha,
                             const ErrorDensity& f);

RegressionFit ols_fit(const DesignResponse& data);

RegressionFit fit_mdpde(const DesignResponse& data, double alpha,
                        const ErrorDensity& f, const FitOptions& options = {});

/// M_{f,i,j}(alpha) = integral of s^i u(s)^j f(s)^(1+alpha), i, j in {0, 1, 2}.
double moment_integral(const ErrorDensity& f, int i, int j, double alpha);

/// Asymptotic variance factors for normal errors.
double vbeta(double alpha);
double vsigma(double alpha);

/// The same factors from the moment integrals of an arbitrary density,
/// valid when M_{f,0,1} = M_{f,1,2} = 0.
double vbeta(const ErrorDensity& f, double alpha);
double vsigma(const ErrorDensity& f, double alpha);

/// sigma^2 Psi^-1 Omega Psi^-1 / T1 with Sigma_x = X'X / T1 and
/// mu_x = X'1 / T1. Normal errors use the block-diagonal closed form.
Eigen::MatrixXd asymptotic_vcov(const RegressionFit& fit,
                                const DesignResponse& data,
                                const ErrorDensity& f);

/// The general sandwich path regardless of density kind; exposed so the
/// closed form can be checked against it.
Eigen::MatrixXd asymptotic_vcov_general(const RegressionFit& fit,
                                        const DesignResponse& data,
                                        const ErrorDensity& f);

}  // namespace dpdate
