#include "dpdate/dpd_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpdate/errors.hpp"
#include "dpdate/normal.hpp"
#include "dpdate/optimizer.hpp"
#include "dpdate/quadrature.hpp"
#include "dpdate/rng.hpp"

namespace dpdate {
namespace {

void check_objective_args(const DesignResponse& data, const RegressionParams& params,
                          double alpha) {
  if (!(alpha > 0.0)) {
    fail(ErrorCode::AlphaOutOfRange,
         "DPD objective requires alpha > 0; use ols_fit for alpha = 0");
  }
  if (!(params.sigma2 > 0.0)) fail(ErrorCode::NonPositiveSigma, "sigma2 must be positive");
  if (params.beta.size() != data.cols()) {
    fail(ErrorCode::DimensionMismatch, "beta length differs from design columns");
  }
}

// Objective and (beta, sigma)-gradient in one pass. `mass` is M_f(alpha).
double evaluate(const DesignResponse& data, const Eigen::VectorXd& beta, double sigma,
                double alpha, double mass, const ErrorDensity& f,
                Eigen::VectorXd* grad) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const Eigen::VectorXd resid = data.y - data.X * beta;
  const double inv_sigma = 1.0 / sigma;
  double mean_pow = 0.0;
  double mean_pow_us = 0.0;
  Eigen::VectorXd weights(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double s = resid(t) * inv_sigma;
    const double fa = f.pdf_pow(s, alpha);
    const double u = f.is_normal() ? -s : f.score(s);
    mean_pow += fa;
    weights(t) = fa * u;
    mean_pow_us += fa * u * s;
  }
  mean_pow /= static_cast<double>(n);
  mean_pow_us /= static_cast<double>(n);
  const double sig_pow = std::pow(sigma, -alpha);
  const double bracket = mass - (1.0 + 1.0 / alpha) * mean_pow;
  if (grad != nullptr) {
    grad->resize(p + 1);
    const double scale = (1.0 + alpha) * sig_pow * inv_sigma / static_cast<double>(n);
    grad->head(p) = scale * (data.X.transpose() * weights);
    (*grad)(p) = sig_pow * inv_sigma * (-alpha * bracket + (1.0 + alpha) * mean_pow_us);
  }
  return sig_pow * bracket;
}

double response_scale(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().mean());
  if (sd > 0.0) return sd;
  return std::max(std::fabs(mean), 1.0);
}

Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd xtx = X.transpose() * X;
  return xtx.ldlt().solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
}

}  // namespace

void check_design_rank(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo / hi >= kSingularRcond)) {
    std::ostringstream msg;
    msg << "X'X is numerically singular (reciprocal condition " << (hi > 0 ? lo / hi : 0.0)
        << ")";
    fail(ErrorCode::SingularDesign, msg.str());
  }
}

DesignResponse DesignResponse::make(Eigen::MatrixXd X, Eigen::VectorXd y) {
  if (X.rows() != y.size()) {
    fail(ErrorCode::DimensionMismatch, "design rows differ from response length");
  }
  if (X.cols() < 1 || X.rows() < 1) fail(ErrorCode::InvalidArgument, "empty design");
  if (!(X.col(0).array() == 1.0).all()) {
    fail(ErrorCode::InvalidArgument, "first design column must be all ones");
  }
  if (!X.allFinite() || !y.allFinite()) {
    fail(ErrorCode::InvalidArgument, "design and response must be finite");
  }
  check_design_rank(X);
  return DesignResponse{std::move(X), std::move(y)};
}

double dpd_objective(const DesignResponse& data, const RegressionParams& params,
                     double alpha, const ErrorDensity& f) {
  check_objective_args(data, params, alpha);
  return evaluate(data, params.beta, std::sqrt(params.sigma2), alpha,
                  f.mass_power(alpha), f, nullptr);
}

Eigen::VectorXd dpd_gradient(const DesignResponse& data, const RegressionParams& params,
                             double alpha, const ErrorDensity& f) {
  check_objective_args(data, params, alpha);
  Eigen::VectorXd grad;
  evaluate(data, params.beta, std::sqrt(params.sigma2), alpha, f.mass_power(alpha), f,
           &grad);
  return grad;
}

RegressionFit ols_fit(const DesignResponse& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n <= p + 1) {
    fail(ErrorCode::InvalidArgument, "need more pre-treatment rows than columns + 1");
  }
  check_design_rank(data.X);
  RegressionFit fit;
  fit.alpha = 0.0;
  fit.params.beta = data.X.colPivHouseholderQr().solve(data.y);
  const Eigen::VectorXd resid = data.y - data.X * fit.params.beta;
  fit.params.sigma2 = resid.squaredNorm() / static_cast<double>(n);
  fit.objective_value = 0.5 * fit.params.sigma2;
  fit.gradient_norm = (data.X.transpose() * resid).lpNorm<Eigen::Infinity>() /
                      static_cast<double>(n);
  fit.converged = true;
  fit.iterations = 0;
  fit.vcov = asymptotic_vcov(fit, data, ErrorDensity::standard_normal());
  return fit;
}

RegressionFit fit_mdpde(const DesignResponse& data, double alpha, const ErrorDensity& f,
                        const FitOptions& options) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    fail(ErrorCode::AlphaOutOfRange, "alpha must be a finite value >= 0");
  }
  if (alpha == 0.0) {
    RegressionFit fit = ols_fit(data);
    if (!f.is_normal()) fit.vcov = asymptotic_vcov(fit, data, f);
    return fit;
  }
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n <= p + 1) {
    fail(ErrorCode::InvalidArgument, "need more pre-treatment rows than columns + 1");
  }
  check_design_rank(data.X);

  const double mass = f.mass_power(alpha);
  const double log_sigma_floor = std::log(1e-8 * response_scale(data.y));

  // Optimizer coordinates: z = (beta, log sigma).
  SmoothObjective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    const double sigma = std::exp(z(p));
    const double value = evaluate(data, z.head(p), sigma, alpha, mass, f, &grad);
    grad(p) *= sigma;
    return value;
  };
  // Stopping rule on the (beta, sigma) gradient; a pinned sigma coordinate
  // does not count.
  StationarityNorm stationarity = [p](const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                                      const Eigen::Array<bool, Eigen::Dynamic, 1>& pinned) {
    double norm = g.head(p).lpNorm<Eigen::Infinity>();
    if (!pinned(p)) norm = std::max(norm, std::fabs(g(p) / std::exp(z(p))));
    return norm;
  };
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(p + 1, -std::numeric_limits<double>::infinity());
  lower(p) = log_sigma_floor;

  RegressionParams base = options.init ? *options.init : ols_fit(data).params;
  if (base.beta.size() != p) {
    fail(ErrorCode::DimensionMismatch, "initial beta length differs from design columns");
  }
  const double base_sigma = std::sqrt(std::max(base.sigma2, 0.0));
  int starts = options.multistart_count > 0 ? options.multistart_count
                                             : (alpha >= 0.5 ? 5 : 1);

  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(p);
  for (Eigen::Index j = 1; j < p; ++j) {
    const double m = data.X.col(j).mean();
    const double sd = std::sqrt((data.X.col(j).array() - m).square().mean());
    col_scale(j) = sd > 0.0 ? sd : 1.0;
  }

  MinimizeOptions mopts;
  mopts.max_iter = options.max_iter;
  mopts.tol = options.tol;

  RandomStream perturb(options.multistart_seed, 0, 0);
  std::optional<MinimizeResult> best;
  int total_iterations = 0;
  for (int k = 0; k < starts; ++k) {
    Eigen::VectorXd z0(p + 1);
    z0.head(p) = base.beta;
    if (k > 0) {
      for (Eigen::Index j = 0; j < p; ++j) {
        z0(j) += base_sigma * perturb.normal() / col_scale(j);
      }
    }
    z0(p) = std::max(std::log(std::max(base_sigma, 1e-300)), log_sigma_floor);
    MinimizeResult r = minimize_bfgs(objective, z0, lower, stationarity, mopts);
    total_iterations += r.iterations;
    const bool better =
        !best || (r.converged && !best->converged) ||
        (r.converged == best->converged && r.value < best->value);
    if (better) best = std::move(r);
  }

  RegressionFit fit;
  fit.alpha = alpha;
  fit.params.beta = best->x.head(p);
  const double sigma = std::exp(best->x(p));
  fit.params.sigma2 = sigma * sigma;
  fit.objective_value = best->value;
  fit.gradient_norm = best->stationarity;
  fit.converged = best->converged;
  fit.iterations = total_iterations;
  fit.starts = starts;
  fit.vcov = asymptotic_vcov(fit, data, f);
  return fit;
}

double moment_integral(const ErrorDensity& f, int i, int j, double alpha) {
  if (i < 0 || i > 2 || j < 0 || j > 2) {
    fail(ErrorCode::InvalidArgument, "moment_integral indices must be in {0, 1, 2}");
  }
  if (!(alpha >= 0.0)) fail(ErrorCode::AlphaOutOfRange, "alpha must be >= 0");
  if (f.is_normal()) {
    const double sign = (j % 2 == 1) ? -1.0 : 1.0;
    return sign * std::pow(2.0 * normal::kPi, -0.5 * alpha) *
           std::pow(1.0 + alpha, -0.5 * (i + j + 1)) * normal::moment(i + j);
  }
  auto integrand = [&](double s) {
    const double fs = f.pdf(s);
    if (fs <= 0.0) return 0.0;
    double v = std::pow(fs, 1.0 + alpha);
    for (int k = 0; k < i; ++k) v *= s;
    if (j > 0) {
      const double u = f.score(s);
      for (int k = 0; k < j; ++k) v *= u;
    }
    return v;
  };
  return integrate_gk15(integrand, f.support_lo(), f.support_hi()).value;
}

double vbeta(double alpha) {
  return std::pow(1.0 + alpha * alpha / (1.0 + 2.0 * alpha), 1.5);
}

double vsigma(double alpha) {
  const double a2 = alpha * alpha;
  return 4.0 / ((a2 + 2.0) * (a2 + 2.0)) *
         (2.0 * (1.0 + 2.0 * a2) * std::pow(1.0 + a2 / (1.0 + 2.0 * alpha), 2.5) -
          a2 * (1.0 + alpha) * (1.0 + alpha));
}

namespace {

struct MomentSet {
  double zeta11, zeta12, zeta22;
  double zeta11_2, zeta12_2, zeta22_2;
  double phi1, phi2;
};

MomentSet moments(const ErrorDensity& f, double alpha) {
  auto M = [&](int i, int j, double a) { return moment_integral(f, i, j, a); };
  MomentSet m{};
  m.zeta11 = M(0, 2, alpha);
  m.zeta12 = 0.5 * (M(0, 1, alpha) + M(1, 2, alpha));
  m.zeta22 = 0.25 * (M(2, 2, alpha) + 2.0 * M(1, 1, alpha) + M(0, 0, alpha));
  m.zeta11_2 = M(0, 2, 2.0 * alpha);
  m.zeta12_2 = 0.5 * (M(0, 1, 2.0 * alpha) + M(1, 2, 2.0 * alpha));
  m.zeta22_2 = 0.25 * (M(2, 2, 2.0 * alpha) + 2.0 * M(1, 1, 2.0 * alpha) +
                       M(0, 0, 2.0 * alpha));
  m.phi1 = -M(0, 1, alpha);
  m.phi2 = -0.5 * (M(0, 0, alpha) + M(1, 1, alpha));
  return m;
}

}  // namespace

double vbeta(const ErrorDensity& f, double alpha) {
  if (f.is_normal()) return vbeta(alpha);
  const MomentSet m = moments(f, alpha);
  return (m.zeta11_2 - m.phi1 * m.phi1) / (m.zeta11 * m.zeta11);
}

double vsigma(const ErrorDensity& f, double alpha) {
  if (f.is_normal()) return vsigma(alpha);
  const MomentSet m = moments(f, alpha);
  return (m.zeta22_2 - m.phi2 * m.phi2) / (m.zeta22 * m.zeta22);
}

Eigen::MatrixXd asymptotic_vcov_general(const RegressionFit& fit,
                                        const DesignResponse& data,
                                        const ErrorDensity& f) {
  const Eigen::Index p = data.cols();
  const double n = static_cast<double>(data.rows());
  if (fit.params.beta.size() != p) {
    fail(ErrorCode::DimensionMismatch, "fit dimension differs from design columns");
  }
  check_design_rank(data.X);
  const double sigma2 = fit.params.sigma2;
  const double sigma = std::sqrt(sigma2);
  const Eigen::MatrixXd sigma_x = data.X.transpose() * data.X / n;
  const Eigen::VectorXd mu_x = data.X.colwise().sum().transpose() / n;
  const MomentSet m = moments(f, fit.alpha);

  Eigen::MatrixXd psi(p + 1, p + 1), omega(p + 1, p + 1);
  psi.topLeftCorner(p, p) = m.zeta11 * sigma_x;
  psi.topRightCorner(p, 1) = (m.zeta12 / sigma) * mu_x;
  psi.bottomLeftCorner(1, p) = psi.topRightCorner(p, 1).transpose();
  psi(p, p) = m.zeta22 / sigma2;
  omega.topLeftCorner(p, p) = (m.zeta11_2 - m.phi1 * m.phi1) * sigma_x;
  omega.topRightCorner(p, 1) = ((m.zeta12_2 - m.phi1 * m.phi2) / sigma) * mu_x;
  omega.bottomLeftCorner(1, p) = omega.topRightCorner(p, 1).transpose();
  omega(p, p) = (m.zeta22_2 - m.phi2 * m.phi2) / sigma2;

  const Eigen::MatrixXd psi_inv =
      psi.fullPivLu().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
  Eigen::MatrixXd v = sigma2 * psi_inv * omega * psi_inv / n;
  return 0.5 * (v + v.transpose());
}

Eigen::MatrixXd asymptotic_vcov(const RegressionFit& fit, const DesignResponse& data,
                                const ErrorDensity& f) {
  if (!f.is_normal()) return asymptotic_vcov_general(fit, data, f);
  const Eigen::Index p = data.cols();
  if (fit.params.beta.size() != p) {
    fail(ErrorCode::DimensionMismatch, "fit dimension differs from design columns");
  }
  check_design_rank(data.X);
  const double sigma2 = fit.params.sigma2;
  const double n = static_cast<double>(data.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(p + 1, p + 1);
  v.topLeftCorner(p, p) = sigma2 * vbeta(fit.alpha) * xtx_inverse(data.X);
  v(p, p) = sigma2 * sigma2 * vsigma(fit.alpha) / n;
  return 0.5 * (v + v.transpose());
}

}  // namespace dpdate
