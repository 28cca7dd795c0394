#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dpdate/errors.hpp"
#include "dpdate/influence.hpp"
#include "test_support.hpp"

using namespace dpdate;

namespace {

double max_abs(const InfluenceCurve& c) {
  double m = 0.0;
  for (double v : c.values) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

TEST_CASE("contamination points carry an intercept") {
  CHECK_NOTHROW(ContaminationPoint::make(Eigen::Vector2d(1.0, 3.0), 2.0));
  CHECK_THROWS_AS(ContaminationPoint::make(Eigen::Vector2d(2.0, 3.0), 2.0), Error);
}

TEST_CASE("pre-treatment influence") {
  const Eigen::Vector2d beta(2.0, 4.0);
  const Eigen::Matrix2d exx_inv = Eigen::Matrix2d::Identity();
  const Eigen::Vector2d mu(1.0, 1.0);
  const Eigen::Vector2d x(1.0, 0.5);
  for (double alpha : {0.0, 0.3, 1.0}) {
    CHECK(if_pre({x, beta.dot(x)}, beta, 4.0, alpha, exx_inv, mu) == 0.0);
  }
  const double sigma2 = 4.0;
  for (double alpha : {0.2, 0.5, 1.0}) {
    // |r exp(-a r^2 / (2 s^2))| peaks at r = s / sqrt(a).
    double best_r = 0.0;
    double best = 0.0;
    for (double r = 0.0; r <= 20.0; r += 1e-4) {
      const double v = std::fabs(if_pre({x, beta.dot(x) + r}, beta, sigma2, alpha, exx_inv, mu));
      if (v > best) {
        best = v;
        best_r = r;
      }
    }
    CHECK(best_r == doctest::Approx(std::sqrt(sigma2 / alpha)).epsilon(1e-3));
  }
  const double design = mu.dot(exx_inv * x);
  CHECK(if_pre({x, beta.dot(x) + 3.0}, beta, sigma2, 0.0, exx_inv, mu) == -3.0 * design);
  // Sign is opposite to residual times design constant.
  CHECK(if_pre({x, beta.dot(x) + 1.0}, beta, sigma2, 0.4, exx_inv, mu) < 0.0);
  CHECK(if_pre({x, beta.dot(x) - 1.0}, beta, sigma2, 0.4, exx_inv, mu) > 0.0);
  CHECK_THROWS_AS(if_pre({Eigen::Vector3d(1, 0, 0), 0.0}, beta, sigma2, 0.4, exx_inv, mu), Error);
}

TEST_CASE("stylized curves shrink with alpha") {
  const auto grid = linspace(-6.0, 6.0, 4801);
  double prev = INFINITY;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    const auto curve = if_curve(stylized_influence_config(alpha), grid);
    const double m = max_abs(curve);
    CHECK(m < prev);
    prev = m;
    const auto it = std::max_element(curve.values.begin(), curve.values.end(),
                                      [](double a, double b) { return std::fabs(a) < std::fabs(b); });
    CHECK(it != curve.values.begin());
    CHECK(it != curve.values.end() - 1);
  }
  CHECK(max_abs(if_curve(stylized_influence_config(0.5), grid)) <
        max_abs(if_curve(stylized_influence_config(0.1), grid)));
}

TEST_CASE("least-squares influence is unbounded") {
  const double c = 6.0;  // fitted value at x = (1, 1)
  const auto narrow = if_curve(stylized_influence_config(0.0, 1.0), linspace(c - 10, c + 10, 101));
  const auto wide = if_curve(stylized_influence_config(0.0, 1.0), linspace(c - 100, c + 100, 101));
  CHECK(max_abs(wide) / max_abs(narrow) == doctest::Approx(10.0).epsilon(1e-12));
  for (double alpha : {0.1, 0.5}) {
    const auto a = if_curve(stylized_influence_config(alpha, 1.0), linspace(c - 10, c + 10, 2001));
    const auto b = if_curve(stylized_influence_config(alpha, 1.0), linspace(c - 100, c + 100, 20001));
    CHECK(max_abs(b) == doctest::Approx(max_abs(a)).epsilon(1e-3));
  }
}

TEST_CASE("least-squares curve is odd about the fitted value") {
  auto cfg = stylized_influence_config(0.0, 1.0);
  const double center = cfg.beta.dot(cfg.x);
  const auto curve = if_curve(cfg, linspace(center - 5, center + 5, 101));
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    CHECK(curve.values[i] == doctest::Approx(-curve.values[curve.values.size() - 1 - i]));
  }
}

TEST_CASE("robust curves vanish far from the fit") {
  const auto cfg = stylized_influence_config(0.3, 1.0);
  const double center = cfg.beta.dot(cfg.x);
  const double sigma = std::sqrt(cfg.sigma2);
  const auto curve = if_curve(cfg, linspace(center - 20 * sigma, center + 20 * sigma, 4001));
  const double m = max_abs(curve);
  CHECK(std::fabs(curve.values.front()) < 1e-6 * m);
  CHECK(std::fabs(curve.values.back()) < 1e-6 * m);
}

TEST_CASE("post-treatment influence is affine") {
  const Eigen::Vector2d beta(2.0, 4.0);
  const Eigen::Vector2d x(1.0, 0.5);
  const double tstar = 0.7;
  CHECK(std::fabs(if_post({x, beta.dot(x) + tstar}, beta, tstar)) < 1e-15);
  CHECK(if_post({x, 5.0 + 1.25}, beta, tstar) - if_post({x, 5.0}, beta, tstar) ==
        doctest::Approx(1.25));
  CHECK(if_post({x, 1e6}, beta, tstar) / if_post({x, 1e3}, beta, tstar) ==
        doctest::Approx(1e3).epsilon(0.01));

  auto cfg = stylized_influence_config(0.5, 1.0);
  cfg.kind = InfluenceKind::Post;
  cfg.ate_functional = tstar;
  const auto curve = if_curve(cfg, linspace(-8.0, 8.0, 65));
  for (std::size_t i = 1; i + 1 < curve.values.size(); ++i) {
    const double second = curve.values[i + 1] - 2 * curve.values[i] + curve.values[i - 1];
    CHECK(std::fabs(second) < 1e-12);
  }
  CHECK((curve.values[1] - curve.values[0]) / (curve.grid[1] - curve.grid[0]) == doctest::Approx(1.0));
}

TEST_CASE("plug-ins from a fitted panel") {
  const auto panel = testing::dgp_panel(3);
  const auto fit = fit_mdpde(panel.pre_design(), 0.5, ErrorDensity::standard_normal());
  const Eigen::VectorXd x = panel.post_covariates().colwise().mean().transpose();
  const auto cfg = influence_config_from_fit(panel, fit, InfluenceKind::Pre, x);
  const Eigen::MatrixXd X0 = panel.pre_covariates();
  CHECK((cfg.exx_inv * (X0.transpose() * X0) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  const auto curve = if_curve(cfg, linspace(-5, 5, 11));
  CHECK(curve.values.size() == 11);
  CHECK(cfg.ate_functional == doctest::Approx(per_period_effects(panel, fit).mean()));
}

TEST_CASE("linspace") {
  const auto g = linspace(-1.0, 1.0, 5);
  CHECK(g.size() == 5);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == 0.0);
  CHECK_THROWS_AS(linspace(0, 1, 1), Error);
}
