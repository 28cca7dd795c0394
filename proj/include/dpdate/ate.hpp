#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "dpdate/density.hpp"
#include "dpdate/dpd_regression.hpp"

namespace dpdate {

/// One treated unit observed over T periods next to N-1 control units.
/// Rows [0, t1) are pre-treatment; treatment starts at row t1.
struct PanelDataset {
  Eigen::VectorXd treated;
  Eigen::MatrixXd controls;  // T x (N - 1)
  Eigen::Index t1 = 0;
  std::vector<double> times;  // optional, length T when present
  std::string treated_label;
  std::vector<std::string> control_labels;

  static PanelDataset make(Eigen::VectorXd treated, Eigen::MatrixXd controls,
                           Eigen::Index t1);

  Eigen::Index periods() const { return treated.size(); }
  Eigen::Index t2() const { return treated.size() - t1; }
  Eigen::Index n_controls() const { return controls.cols(); }

  /// Pre-period regression of the treated unit on (1, controls).
  DesignResponse pre_design() const;
  /// Post-period covariate rows x_t = (1, controls_t).
  Eigen::MatrixXd post_covariates() const;
  Eigen::MatrixXd pre_covariates() const;
};

enum class AggregateKind { Mean, Median };

std::string_view to_string(AggregateKind kind);

struct Sigma2Mode {
  enum class Kind { Iid, Hac };
  Kind kind = Kind::Iid;
  /// Truncation lag for Hac; negative selects floor(T2^(1/4)).
  int lag = -1;

  static Sigma2Mode iid() { return {Kind::Iid, 0}; }
  static Sigma2Mode hac(int lag = -1) { return {Kind::Hac, lag}; }

  int resolved_lag(Eigen::Index t2) const;
  std::string label() const;
};

struct Sigma2Estimate {
  double value = 0.0;  // clamped at zero
  double raw = 0.0;
  bool clamped = false;
  int lag = 0;
};

struct AteEstimate {
  double alpha = 0.0;
  AggregateKind aggregate_kind = AggregateKind::Mean;
  Eigen::VectorXd per_period;
  double value = 0.0;
  double sigma_hat = 0.0;   // estimated asymptotic variance of sqrt(T2) * estimate
  double sigma2_hat = 0.0;  // post-period process variance component
  double se = 0.0;
  Sigma2Mode sigma2_mode;
  bool sigma2_clamped = false;
  /// Median aggregates reuse the mean-based variance formula.
  bool se_approximate = false;
  double omega = 0.0;  // T2 / T1
  Eigen::Index t1 = 0;
  Eigen::Index t2 = 0;
  RegressionFit fit;
};

Eigen::VectorXd counterfactual_predict(const RegressionFit& fit, const PanelDataset& panel);

Eigen::VectorXd per_period_effects(const PanelDataset& panel, const RegressionFit& fit);

/// Centered autocovariance sum over |t - s| <= lag divided by T2. The iid mode
/// keeps only the t = s terms.
Sigma2Estimate sigma2_hat(std::span<const double> effects, const Sigma2Mode& mode);
Sigma2Estimate sigma2_hat(const Eigen::VectorXd& effects, const Sigma2Mode& mode);

/// v_beta * sigma2 / T2 * S' (sum_pre x x')^-1 S with S = sum_post x_t.
double design_variance_term(const PanelDataset& panel, const RegressionFit& fit,
                            const ErrorDensity& f);

double sigma_hat(const PanelDataset& panel, const RegressionFit& fit,
                 const Eigen::VectorXd& effects, const Sigma2Mode& mode,
                 const ErrorDensity& f = ErrorDensity::standard_normal());

double median(Eigen::VectorXd values);

AteEstimate estimate_ate(const PanelDataset& panel, double alpha, AggregateKind kind,
                         const Sigma2Mode& mode = Sigma2Mode::iid(),
                         const ErrorDensity& f = ErrorDensity::standard_normal(),
                         const FitOptions& options = {});

/// Aggregates effects around an existing fit (shared by the mean and median
/// estimators in simulations).
AteEstimate aggregate_ate(const PanelDataset& panel, const RegressionFit& fit,
                          AggregateKind kind, const Sigma2Mode& mode,
                          const ErrorDensity& f = ErrorDensity::standard_normal());

}  // namespace dpdate
