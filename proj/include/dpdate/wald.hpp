#pragma once

#include <string_view>

#include "dpdate/ate.hpp"

namespace dpdate {

enum class Alternative { Greater, Less, TwoSided };

std::string_view to_string(Alternative alt);
Alternative parse_alternative(std::string_view text);

struct TestResult {
  double statistic = 0.0;
  Alternative alternative = Alternative::TwoSided;
  double level = 0.05;
  double p_value = 1.0;
  bool reject = false;
  /// z_tau (greater), -z_tau (less) or z_{tau/2} (two-sided, compared to |W|).
  double critical_value = 0.0;
};

/// Decision and p-value for a statistic that is N(0, 1) under the null.
TestResult normal_test(double statistic, Alternative alt, double level);

/// W1 = sqrt(T2) (estimate - delta0) / sqrt(Sigma_hat).
TestResult one_sample_test(const AteEstimate& est, double delta0, Alternative alt,
                           double level);

/// W2 = (est1 - est2) / sqrt(Sigma_1 / T21 + Sigma_2 / T22); both estimates
/// must share alpha.
TestResult two_sample_test(const AteEstimate& est1, const AteEstimate& est2,
                           Alternative alt, double level);

double approx_power_one(double delta_star, double delta0, double sigma_hat, double t2,
                        double level);

double contiguous_power_one(double d, double sigma_alpha, double level);

double approx_power_two(double delta1_star, double delta2_star, double sigma_pop1,
                        double sigma_pop2, double t21, double t22, double level);

/// eta is the limiting share T22 / (T21 + T22), in (0, 1).
double contiguous_power_two(double d, double sigma_pop1, double sigma_pop2, double eta,
                            double level);

}  // namespace dpdate
