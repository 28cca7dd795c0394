#include <doctest.h>

#include <cmath>
#include <string>

#include "dpdate/ate.hpp"
#include "dpdate/errors.hpp"
#include "dpdate/panel_io.hpp"
#include "test_support.hpp"

using namespace dpdate;

namespace {

RegressionFit fit_with(Eigen::VectorXd beta, double sigma2 = 1.0) {
  RegressionFit f;
  f.params = {std::move(beta), sigma2};
  return f;
}

}  // namespace

TEST_CASE("counterfactual of an identity projection is the first control") {
  const auto panel = testing::dgp_panel(1);
  const auto pred = counterfactual_predict(fit_with(Eigen::Vector3d(0, 1, 0)), panel);
  CHECK(pred == panel.controls.col(0).tail(panel.t2()));
  const auto flat = counterfactual_predict(fit_with(Eigen::Vector3d(2.5, 0, 0)), panel);
  CHECK(flat == Eigen::VectorXd::Constant(panel.t2(), 2.5));
  CHECK_THROWS_AS(counterfactual_predict(fit_with(Eigen::Vector2d(0, 1)), panel), Error);
}

TEST_CASE("counterfactual matches a direct product") {
  const auto panel = testing::dgp_panel(3);
  const Eigen::Vector3d beta(0.3, 0.4, 0.5);
  const auto pred = counterfactual_predict(fit_with(beta), panel);
  for (Eigen::Index t = 0; t < panel.t2(); ++t) {
    const Eigen::Index row = panel.t1 + t;
    const double direct = beta(0) + beta(1) * panel.controls(row, 0) + beta(2) * panel.controls(row, 1);
    CHECK(std::fabs(pred(t) - direct) < 1e-12);
  }
}

TEST_CASE("per-period effects") {
  auto panel = testing::dgp_panel(2);
  const Eigen::Vector3d beta(0.1, 0.2, 0.3);
  const auto pred = counterfactual_predict(fit_with(beta), panel);
  panel.treated.tail(panel.t2()) = pred;
  CHECK(per_period_effects(panel, fit_with(beta)).cwiseAbs().maxCoeff() < 1e-15);
  panel.treated.tail(panel.t2()).array() += 1.0;
  CHECK((per_period_effects(panel, fit_with(beta)).array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("hcw pipeline matches an independent least-squares solve") {
  const auto panel = testing::dgp_panel(5);
  const auto est = estimate_ate(panel, 0.0, AggregateKind::Mean);
  const Eigen::MatrixXd X = panel.pre_covariates();
  const Eigen::VectorXd y = panel.treated.head(panel.t1);
  const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const double hcw = (panel.treated.tail(panel.t2()) - panel.post_covariates() * beta).mean();
  CHECK(std::fabs(est.value - hcw) < 1e-10);
  CHECK(est.value == est.per_period.mean());
}

TEST_CASE("constant effects aggregate to the constant") {
  auto panel = testing::dgp_panel(4);
  const auto fit = fit_mdpde(panel.pre_design(), 0.3, ErrorDensity::standard_normal());
  panel.treated.tail(panel.t2()) = counterfactual_predict(fit, panel).array() + 0.75;
  for (auto kind : {AggregateKind::Mean, AggregateKind::Median}) {
    const auto est = aggregate_ate(panel, fit, kind, Sigma2Mode::iid());
    CHECK(est.value == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(est.sigma2_hat == doctest::Approx(0.0).epsilon(1e-20));
  }
}

TEST_CASE("median conventions") {
  CHECK(median(Eigen::Vector4d(4, 1, 3, 2)) == 2.5);
  CHECK(median(Eigen::Vector3d(5, -1, 2)) == 2.0);
}

TEST_CASE("post-period variance estimators") {
  const Eigen::Vector4d alt(1, -1, 1, -1);
  const auto iid = sigma2_hat(alt, Sigma2Mode::iid());
  CHECK(iid.value == 1.0);
  const auto hac1 = sigma2_hat(alt, Sigma2Mode::hac(1));
  CHECK(hac1.raw == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(hac1.clamped);
  CHECK(hac1.value == 0.0);

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(6, 3.0);
  CHECK(sigma2_hat(flat, Sigma2Mode::iid()).value == 0.0);
  CHECK(sigma2_hat(flat, Sigma2Mode::hac(2)).value == 0.0);

  const auto effects = estimate_ate(testing::dgp_panel(9), 0.0, AggregateKind::Mean).per_period;
  CHECK(sigma2_hat(effects, Sigma2Mode::hac(0)).value == sigma2_hat(effects, Sigma2Mode::iid()).value);
  CHECK(Sigma2Mode::hac().resolved_lag(20) == 2);
  CHECK(Sigma2Mode::hac().resolved_lag(320) == 4);
  CHECK_THROWS_AS(sigma2_hat(Eigen::VectorXd::Ones(1), Sigma2Mode::iid()), Error);
}

TEST_CASE("variance estimate matches a direct evaluation") {
  const auto panel = testing::dgp_panel(6);
  for (double alpha : {0.0, 0.5}) {
    const auto est = estimate_ate(panel, alpha, AggregateKind::Mean);
    const Eigen::MatrixXd X0 = panel.pre_covariates();
    const Eigen::VectorXd s = panel.post_covariates().colwise().sum().transpose();
    const double t2 = static_cast<double>(panel.t2());
    const double quad = s.dot((X0.transpose() * X0).inverse() * s);
    const Eigen::ArrayXd c = est.per_period.array() - est.per_period.mean();
    const double s2 = (c * c).sum() / t2;
    const double direct = vbeta(alpha) * est.fit.params.sigma2 / t2 * quad + s2;
    CHECK(std::fabs(est.sigma_hat - direct) < 1e-10);
    CHECK(est.se == doctest::Approx(std::sqrt(direct / t2)).epsilon(1e-14));
    CHECK(est.sigma_hat >= est.sigma2_hat - 1e-12);
    CHECK(est.sigma_hat - est.sigma2_hat > 0.0);
    CHECK(est.omega == doctest::Approx(t2 / panel.t1));
  }
}

TEST_CASE("median aggregate resists post-period outliers") {
  auto panel = testing::dgp_panel(10);
  const auto fit = fit_mdpde(panel.pre_design(), 0.3, ErrorDensity::standard_normal());
  const auto clean_med = aggregate_ate(panel, fit, AggregateKind::Median, Sigma2Mode::iid());
  const auto clean_mean = aggregate_ate(panel, fit, AggregateKind::Mean, Sigma2Mode::iid());
  const Eigen::VectorXd e = clean_med.per_period;
  const Eigen::Index k = (panel.t2() - 1) / 2;
  for (Eigen::Index i = 0; i < k; ++i) panel.treated(panel.t1 + i) += 1e6;
  const auto dirty_med = aggregate_ate(panel, fit, AggregateKind::Median, Sigma2Mode::iid());
  const auto dirty_mean = aggregate_ate(panel, fit, AggregateKind::Mean, Sigma2Mode::iid());
  const Eigen::VectorXd untouched = e.tail(panel.t2() - k);
  CHECK(std::fabs(dirty_med.value - clean_med.value) <= untouched.maxCoeff() - untouched.minCoeff());
  CHECK(std::fabs(dirty_mean.value - clean_mean.value) > 1e4);
  CHECK(dirty_med.se_approximate);
  CHECK_FALSE(dirty_mean.se_approximate);
}

TEST_CASE("location equivariance") {
  auto panel = testing::dgp_panel(13);
  const auto fit = fit_mdpde(panel.pre_design(), 0.5, ErrorDensity::standard_normal());
  const auto before_mean = aggregate_ate(panel, fit, AggregateKind::Mean, Sigma2Mode::iid());
  const auto before_med = aggregate_ate(panel, fit, AggregateKind::Median, Sigma2Mode::iid());
  panel.treated.tail(panel.t2()).array() += 2.0;
  const auto after_mean = aggregate_ate(panel, fit, AggregateKind::Mean, Sigma2Mode::iid());
  const auto after_med = aggregate_ate(panel, fit, AggregateKind::Median, Sigma2Mode::iid());
  CHECK(((after_mean.per_period - before_mean.per_period).array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK(after_mean.value - before_mean.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(after_med.value - before_med.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mean and median agree on clean data") {
  int violations = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto panel = testing::dgp_panel(r);
    const auto fit = fit_mdpde(panel.pre_design(), 0.3, ErrorDensity::standard_normal());
    const auto mean = aggregate_ate(panel, fit, AggregateKind::Mean, Sigma2Mode::iid());
    const auto med = aggregate_ate(panel, fit, AggregateKind::Median, Sigma2Mode::iid());
    if (std::fabs(mean.value - med.value) >= 3.0 * mean.se) ++violations;
  }
  CHECK(violations < reps / 20);
}

TEST_CASE("panel validation") {
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 1);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(10, 2);
  CHECK_THROWS_AS(PanelDataset::make(y, c, 0), Error);
  CHECK_THROWS_AS(PanelDataset::make(y, c, 9), Error);
  CHECK_THROWS_AS(PanelDataset::make(y, c.topRows(9), 5), Error);
  Eigen::MatrixXd bad = c;
  bad(3, 1) = std::nan("");
  try {
    PanelDataset::make(y, bad, 5);
    FAIL("expected MissingValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingValue);
  }
}

TEST_CASE("estimates are consistent in large samples") {
  double sum = 0.0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    const auto gen = gen_panel(testing::dgp(400, 320), r);
    const auto est = estimate_ate(gen.panel, 0.3, AggregateKind::Mean);
    sum += est.value - gen.true_ate;
  }
  CHECK(std::fabs(sum / reps) <= 0.01);
}

TEST_CASE("bundled fixture: robust fits ignore pre-period shocks") {
  // No unit in the fixture has a true effect; each carries two large
  // pre-period shocks.
  for (const char* unit : {"IDN", "IND", "THA", "MDV", "LKA"}) {
    CAPTURE(unit);
    const std::string dir = DPDATE_DATA_DIR;
    const auto schema =
        PanelCsvSchema::from_json_file(dir + "/synthetic_gdp_" + unit + ".schema.json");
    const auto panel = load_panel_csv(dir + "/synthetic_gdp.csv", schema);
    const double a3 = estimate_ate(panel, 0.3, AggregateKind::Mean).value;
    const double a5 = estimate_ate(panel, 0.5, AggregateKind::Mean).value;
    CHECK(std::fabs(a3) <= 0.15);
    CHECK(std::fabs(a5) <= 0.15);
    CHECK(std::fabs(a3 - a5) <= 0.1);
  }
  for (const char* unit : {"IND", "THA", "LKA"}) {
    CAPTURE(unit);
    const std::string dir = DPDATE_DATA_DIR;
    const auto schema =
        PanelCsvSchema::from_json_file(dir + "/synthetic_gdp_" + unit + ".schema.json");
    const auto panel = load_panel_csv(dir + "/synthetic_gdp.csv", schema);
    CHECK(std::fabs(estimate_ate(panel, 0.0, AggregateKind::Mean).value) >= 0.25);
  }
}
