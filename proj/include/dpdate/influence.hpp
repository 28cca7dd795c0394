#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dpdate/ate.hpp"

namespace dpdate {

/// Point mass (x_t, y_1t) added to the pre- or post-treatment distribution.
struct ContaminationPoint {
  Eigen::VectorXd x;  // leads with the intercept entry 1
  double y = 0.0;

  /// Enforces x[0] == 1.
  static ContaminationPoint make(Eigen::VectorXd x, double y);
};

enum class InfluenceKind { Pre, Post };

/// Pre-treatment influence of the Mean-MDPDE ATE functional:
///   -(1+a)^{3/2} r exp(-a r^2 / (2 sigma2)) * post_mean_x' exx_inv x,
/// with r = y - beta' x. At alpha = 0 this is the unbounded least-squares
/// influence.
double if_pre(const ContaminationPoint& point, const Eigen::VectorXd& beta, double sigma2,
              double alpha, const Eigen::MatrixXd& exx_inv,
              const Eigen::VectorXd& post_mean_x);

/// Post-treatment influence: y - x' beta - ate_functional_value.
double if_post(const ContaminationPoint& point, const Eigen::VectorXd& beta,
               double ate_functional_value);

/// How a scalar grid value g maps to a contamination point.
enum class InfluencePath {
  /// x fixed at `config.x`, y = g.
  Response,
  /// x = (g, ..., g), y = g: the stylized sweep in which covariates and the
  /// response move together.
  Diagonal,
};

struct InfluenceConfig {
  InfluenceKind kind = InfluenceKind::Pre;
  InfluencePath path = InfluencePath::Response;
  double alpha = 0.0;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::MatrixXd exx_inv;
  Eigen::VectorXd post_mean_x;
  Eigen::VectorXd x;             // Response path only
  double ate_functional = 0.0;   // Post kind only
};

struct InfluenceCurve {
  std::vector<double> grid;
  std::vector<double> values;
  double alpha = 0.0;
  InfluenceKind kind = InfluenceKind::Pre;
};

InfluenceCurve if_curve(const InfluenceConfig& config, const std::vector<double>& grid);

/// Stylized two-coefficient configuration: beta = (2, 4), sigma = 2,
/// identity exx_inv, unit post-period covariate mean. Without `t` the grid
/// sweeps the diagonal x = (g, g), y = g; with `t` the covariate is held at
/// (t, t) and only the response moves.
InfluenceConfig stylized_influence_config(double alpha, std::optional<double> t = std::nullopt);

/// Plug-ins from a fitted panel: exx_inv = (X0'X0)^-1, post_mean_x the
/// post-period covariate mean, beta and sigma2 from the fit. The response
/// sweep holds x at `x`.
InfluenceConfig influence_config_from_fit(const PanelDataset& panel,
                                          const RegressionFit& fit, InfluenceKind kind,
                                          const Eigen::VectorXd& x);

std::vector<double> linspace(double lo, double hi, std::size_t points);

}  // namespace dpdate
