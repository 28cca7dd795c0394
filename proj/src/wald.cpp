#include "dpdate/wald.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpdate/errors.hpp"
#include "dpdate/normal.hpp"

namespace dpdate {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorCode::InvalidArgument, "test level must lie in (0, 1)");
  }
}

}  // namespace

std::string_view to_string(Alternative alt) {
  switch (alt) {
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
    case Alternative::TwoSided: return "two-sided";
  }
  return "two-sided";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "greater") return Alternative::Greater;
  if (text == "less") return Alternative::Less;
  if (text == "two-sided" || text == "two_sided") return Alternative::TwoSided;
  fail(ErrorCode::UsageError, "unknown alternative '" + std::string(text) + "'");
}

TestResult normal_test(double statistic, Alternative alt, double level) {
  check_level(level);
  TestResult r;
  r.statistic = statistic;
  r.alternative = alt;
  r.level = level;
  const double upper = normal::sf(statistic);
  const double lower = normal::cdf(statistic);
  switch (alt) {
    case Alternative::Greater:
      r.critical_value = normal::upper_quantile(level);
      r.p_value = upper;
      r.reject = statistic > r.critical_value;
      break;
    case Alternative::Less:
      r.critical_value = -normal::upper_quantile(level);
      r.p_value = lower;
      r.reject = statistic < r.critical_value;
      break;
    case Alternative::TwoSided:
      r.critical_value = normal::upper_quantile(0.5 * level);
      r.p_value = std::min(1.0, 2.0 * std::min(upper, lower));
      r.reject = std::fabs(statistic) > r.critical_value;
      break;
  }
  return r;
}

TestResult one_sample_test(const AteEstimate& est, double delta0, Alternative alt,
                           double level) {
  if (!(est.sigma_hat > 0.0) || !(est.se > 0.0)) {
    fail(ErrorCode::ZeroStandardError, "estimate has zero standard error");
  }
  const double t2 = static_cast<double>(est.per_period.size());
  const double w = std::sqrt(t2) * (est.value - delta0) / std::sqrt(est.sigma_hat);
  return normal_test(w, alt, level);
}

TestResult two_sample_test(const AteEstimate& est1, const AteEstimate& est2,
                           Alternative alt, double level) {
  if (est1.alpha != est2.alpha) {
    fail(ErrorCode::AlphaMismatch, "two-sample test needs estimates at the same alpha");
  }
  if (!(est1.sigma_hat > 0.0) || !(est2.sigma_hat > 0.0)) {
    fail(ErrorCode::ZeroStandardError, "estimate has zero standard error");
  }
  const double var = est1.sigma_hat / static_cast<double>(est1.per_period.size()) +
                     est2.sigma_hat / static_cast<double>(est2.per_period.size());
  return normal_test((est1.value - est2.value) / std::sqrt(var), alt, level);
}

double approx_power_one(double delta_star, double delta0, double sigma_hat, double t2,
                        double level) {
  check_level(level);
  if (!(sigma_hat > 0.0) || !(t2 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "power needs positive variance and sample size");
  }
  const double z = normal::upper_quantile(level);
  return normal::sf(z - std::sqrt(t2 / sigma_hat) * (delta_star - delta0));
}

double contiguous_power_one(double d, double sigma_alpha, double level) {
  check_level(level);
  if (!(sigma_alpha > 0.0)) fail(ErrorCode::InvalidArgument, "variance must be positive");
  return normal::sf(normal::upper_quantile(level) - d / std::sqrt(sigma_alpha));
}

double approx_power_two(double delta1_star, double delta2_star, double sigma_pop1,
                        double sigma_pop2, double t21, double t22, double level) {
  check_level(level);
  if (!(sigma_pop1 > 0.0) || !(sigma_pop2 > 0.0) || !(t21 > 0.0) || !(t22 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "power needs positive variances and sample sizes");
  }
  const double scale = std::sqrt(sigma_pop1 / t21 + sigma_pop2 / t22);
  return normal::sf(normal::upper_quantile(level) - (delta1_star - delta2_star) / scale);
}

double contiguous_power_two(double d, double sigma_pop1, double sigma_pop2, double eta,
                            double level) {
  check_level(level);
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
  if (!(sigma_pop1 > 0.0) || !(sigma_pop2 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "variances must be positive");
  }
  const double scale = std::sqrt(eta * sigma_pop1 + (1.0 - eta) * sigma_pop2);
  return normal::sf(normal::upper_quantile(level) - d / scale);
}

}  // namespace dpdate
