#include "dpdate/ate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpdate/errors.hpp"

namespace dpdate {

PanelDataset PanelDataset::make(Eigen::VectorXd treated, Eigen::MatrixXd controls,
                                Eigen::Index t1) {
  const Eigen::Index T = treated.size();
  if (controls.rows() != T) {
    fail(ErrorCode::DimensionMismatch, "control rows differ from treated length");
  }
  if (!(t1 > 0 && t1 < T - 1)) {
    std::ostringstream msg;
    msg << "treatment index must satisfy 0 < T1 < T - 1 (T1 = " << t1 << ", T = " << T
        << ")";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  if (!treated.allFinite() || !controls.allFinite()) {
    fail(ErrorCode::MissingValue, "panel contains non-finite values");
  }
  PanelDataset panel;
  panel.treated = std::move(treated);
  panel.controls = std::move(controls);
  panel.t1 = t1;
  return panel;
}

Eigen::MatrixXd PanelDataset::pre_covariates() const {
  Eigen::MatrixXd X(t1, controls.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(controls.cols()) = controls.topRows(t1);
  return X;
}

Eigen::MatrixXd PanelDataset::post_covariates() const {
  Eigen::MatrixXd X(t2(), controls.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(controls.cols()) = controls.bottomRows(t2());
  return X;
}

DesignResponse PanelDataset::pre_design() const {
  return DesignResponse::make(pre_covariates(), treated.head(t1));
}

std::string_view to_string(AggregateKind kind) {
  return kind == AggregateKind::Mean ? "mean" : "median";
}

int Sigma2Mode::resolved_lag(Eigen::Index t2) const {
  if (kind == Kind::Iid) return 0;
  if (lag >= 0) return lag;
  return static_cast<int>(std::floor(std::pow(static_cast<double>(t2), 0.25)));
}

std::string Sigma2Mode::label() const {
  if (kind == Kind::Iid) return "iid";
  return lag >= 0 ? "hac:" + std::to_string(lag) : "hac";
}

Eigen::VectorXd counterfactual_predict(const RegressionFit& fit, const PanelDataset& panel) {
  if (fit.params.beta.size() != panel.n_controls() + 1) {
    fail(ErrorCode::DimensionMismatch, "fit dimension differs from 1 + control count");
  }
  return panel.post_covariates() * fit.params.beta;
}

Eigen::VectorXd per_period_effects(const PanelDataset& panel, const RegressionFit& fit) {
  return panel.treated.tail(panel.t2()) - counterfactual_predict(fit, panel);
}

Sigma2Estimate sigma2_hat(std::span<const double> effects, const Sigma2Mode& mode) {
  const auto n = static_cast<Eigen::Index>(effects.size());
  if (n < 2) fail(ErrorCode::InsufficientPostPeriod, "need at least two effects");
  if (mode.kind == Sigma2Mode::Kind::Hac && mode.lag < -1) {
    fail(ErrorCode::InvalidArgument, "HAC lag must be >= 0");
  }
  Eigen::Map<const Eigen::VectorXd> e(effects.data(), n);
  const Eigen::VectorXd c = e.array() - e.mean();
  const int lag = static_cast<int>(std::min<Eigen::Index>(mode.resolved_lag(n), n - 1));
  double sum = c.squaredNorm();
  for (int k = 1; k <= lag; ++k) {
    sum += 2.0 * c.head(n - k).dot(c.tail(n - k));
  }
  Sigma2Estimate out;
  out.raw = sum / static_cast<double>(n);
  out.clamped = out.raw < 0.0;
  out.value = out.clamped ? 0.0 : out.raw;
  out.lag = lag;
  return out;
}

Sigma2Estimate sigma2_hat(const Eigen::VectorXd& effects, const Sigma2Mode& mode) {
  return sigma2_hat(std::span<const double>(effects.data(), effects.size()), mode);
}

double design_variance_term(const PanelDataset& panel, const RegressionFit& fit,
                            const ErrorDensity& f) {
  if (fit.params.beta.size() != panel.n_controls() + 1) {
    fail(ErrorCode::DimensionMismatch, "fit dimension differs from 1 + control count");
  }
  const Eigen::MatrixXd X0 = panel.pre_covariates();
  check_design_rank(X0);
  const Eigen::VectorXd post_sum = panel.post_covariates().colwise().sum().transpose();
  const Eigen::MatrixXd xtx = X0.transpose() * X0;
  const double quad = post_sum.dot(xtx.ldlt().solve(post_sum));
  return vbeta(f, fit.alpha) * fit.params.sigma2 / static_cast<double>(panel.t2()) * quad;
}

double sigma_hat(const PanelDataset& panel, const RegressionFit& fit,
                 const Eigen::VectorXd& effects, const Sigma2Mode& mode,
                 const ErrorDensity& f) {
  return design_variance_term(panel, fit, f) + sigma2_hat(effects, mode).value;
}

double median(Eigen::VectorXd values) {
  const Eigen::Index n = values.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "median of empty vector");
  double* data = values.data();
  const Eigen::Index mid = n / 2;
  std::nth_element(data, data + mid, data + n);
  const double upper = data[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(data, data + mid);
  return 0.5 * (lower + upper);
}

AteEstimate aggregate_ate(const PanelDataset& panel, const RegressionFit& fit,
                          AggregateKind kind, const Sigma2Mode& mode,
                          const ErrorDensity& f) {
  if (panel.t2() < 2) {
    fail(ErrorCode::InsufficientPostPeriod, "need at least two post-treatment periods");
  }
  AteEstimate est;
  est.alpha = fit.alpha;
  est.aggregate_kind = kind;
  est.per_period = per_period_effects(panel, fit);
  est.value = kind == AggregateKind::Mean ? est.per_period.mean() : median(est.per_period);
  const Sigma2Estimate s2 = sigma2_hat(est.per_period, mode);
  est.sigma2_hat = s2.value;
  est.sigma2_clamped = s2.clamped;
  est.sigma2_mode = mode;
  est.sigma_hat = design_variance_term(panel, fit, f) + s2.value;
  est.se = std::sqrt(est.sigma_hat / static_cast<double>(panel.t2()));
  est.se_approximate = kind == AggregateKind::Median;
  est.t1 = panel.t1;
  est.t2 = panel.t2();
  est.omega = static_cast<double>(est.t2) / static_cast<double>(est.t1);
  est.fit = fit;
  return est;
}

AteEstimate estimate_ate(const PanelDataset& panel, double alpha, AggregateKind kind,
                         const Sigma2Mode& mode, const ErrorDensity& f,
                         const FitOptions& options) {
  if (panel.t2() < 2) {
    fail(ErrorCode::InsufficientPostPeriod, "need at least two post-treatment periods");
  }
  const RegressionFit fit = fit_mdpde(panel.pre_design(), alpha, f, options);
  return aggregate_ate(panel, fit, kind, mode, f);
}

}  // namespace dpdate
