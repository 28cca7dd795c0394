#include "dpdate/influence.hpp"

#include <cmath>

#include "dpdate/errors.hpp"

namespace dpdate {

ContaminationPoint ContaminationPoint::make(Eigen::VectorXd x, double y) {
  if (x.size() == 0 || x(0) != 1.0) {
    fail(ErrorCode::InvalidArgument, "contamination covariate must start with 1");
  }
  return ContaminationPoint{std::move(x), y};
}

double if_pre(const ContaminationPoint& point, const Eigen::VectorXd& beta, double sigma2,
              double alpha, const Eigen::MatrixXd& exx_inv,
              const Eigen::VectorXd& post_mean_x) {
  const Eigen::Index p = beta.size();
  if (point.x.size() != p || exx_inv.rows() != p || exx_inv.cols() != p ||
      post_mean_x.size() != p) {
    fail(ErrorCode::DimensionMismatch, "influence arguments disagree in dimension");
  }
  if (!(sigma2 > 0.0)) fail(ErrorCode::NonPositiveSigma, "sigma2 must be positive");
  if (!(alpha >= 0.0)) fail(ErrorCode::AlphaOutOfRange, "alpha must be >= 0");
  const double r = point.y - beta.dot(point.x);
  const double design = post_mean_x.dot(exx_inv * point.x);
  const double weight = alpha == 0.0
                            ? 1.0
                            : std::pow(1.0 + alpha, 1.5) *
                                  std::exp(-alpha * r * r / (2.0 * sigma2));
  return -weight * r * design;
}

double if_post(const ContaminationPoint& point, const Eigen::VectorXd& beta,
               double ate_functional_value) {
  if (point.x.size() != beta.size()) {
    fail(ErrorCode::DimensionMismatch, "influence arguments disagree in dimension");
  }
  return point.y - point.x.dot(beta) - ate_functional_value;
}

InfluenceCurve if_curve(const InfluenceConfig& config, const std::vector<double>& grid) {
  const Eigen::Index p = config.beta.size();
  InfluenceCurve curve;
  curve.alpha = config.alpha;
  curve.kind = config.kind;
  curve.grid = grid;
  curve.values.reserve(grid.size());
  for (const double g : grid) {
    ContaminationPoint point;
    if (config.path == InfluencePath::Response) {
      if (config.x.size() != p) {
        fail(ErrorCode::DimensionMismatch, "sweep covariate has the wrong length");
      }
      point = {config.x, g};
    } else {
      point = {Eigen::VectorXd::Constant(p, g), g};
    }
    curve.values.push_back(config.kind == InfluenceKind::Pre
                               ? if_pre(point, config.beta, config.sigma2, config.alpha,
                                        config.exx_inv, config.post_mean_x)
                               : if_post(point, config.beta, config.ate_functional));
  }
  return curve;
}

InfluenceConfig stylized_influence_config(double alpha, std::optional<double> t) {
  InfluenceConfig c;
  c.kind = InfluenceKind::Pre;
  c.path = t ? InfluencePath::Response : InfluencePath::Diagonal;
  if (t) c.x = Eigen::Vector2d(*t, *t);
  c.alpha = alpha;
  c.beta = Eigen::Vector2d(2.0, 4.0);
  c.sigma2 = 4.0;
  c.exx_inv = Eigen::Matrix2d::Identity();
  c.post_mean_x = Eigen::Vector2d(1.0, 1.0);
  return c;
}

InfluenceConfig influence_config_from_fit(const PanelDataset& panel,
                                          const RegressionFit& fit, InfluenceKind kind,
                                          const Eigen::VectorXd& x) {
  const Eigen::MatrixXd X0 = panel.pre_covariates();
  check_design_rank(X0);
  const Eigen::MatrixXd xtx = X0.transpose() * X0;
  InfluenceConfig c;
  c.kind = kind;
  c.path = InfluencePath::Response;
  c.alpha = fit.alpha;
  c.beta = fit.params.beta;
  c.sigma2 = fit.params.sigma2;
  c.exx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
  c.post_mean_x = panel.post_covariates().colwise().mean().transpose();
  c.x = x;
  c.ate_functional = per_period_effects(panel, fit).mean();
  return c;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two points");
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace dpdate
