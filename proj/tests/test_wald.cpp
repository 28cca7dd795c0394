#include <doctest.h>

#include <cmath>

#include "dpdate/errors.hpp"
#include "dpdate/normal.hpp"
#include "dpdate/sim.hpp"
#include "dpdate/wald.hpp"

using namespace dpdate;

namespace {

AteEstimate synthetic(double value, double sigma_hat, int t2, double alpha = 0.5) {
  AteEstimate e;
  e.alpha = alpha;
  e.value = value;
  e.sigma_hat = sigma_hat;
  e.per_period = Eigen::VectorXd::Zero(t2);
  e.t2 = t2;
  e.se = std::sqrt(sigma_hat / t2);
  return e;
}

}  // namespace

TEST_CASE("one-sample statistic") {
  const auto at_null = one_sample_test(synthetic(0.4, 2.0, 25), 0.4, Alternative::TwoSided, 0.05);
  CHECK(at_null.statistic == 0.0);
  CHECK(at_null.p_value == 1.0);
  CHECK_FALSE(at_null.reject);

  const auto e = synthetic(1.0, 4.0, 100);
  const auto boundary = one_sample_test(e, 1.0 - 1.96 * e.se, Alternative::Greater, 0.05);
  CHECK(boundary.statistic == doctest::Approx(1.96));
  CHECK(boundary.reject);
  CHECK(boundary.critical_value == doctest::Approx(1.6448536269514722));

  const auto less = one_sample_test(e, 1.0 + 1.7 * e.se, Alternative::Less, 0.05);
  CHECK(less.reject);
  CHECK(less.critical_value == doctest::Approx(-1.6448536269514722));
}

TEST_CASE("two-sided p-value is twice the smaller one-sided p-value") {
  for (double w : {-2.5, -0.3, 0.0, 0.8, 3.1}) {
    const auto two = normal_test(w, Alternative::TwoSided, 0.05);
    const auto g = normal_test(w, Alternative::Greater, 0.05);
    const auto l = normal_test(w, Alternative::Less, 0.05);
    CHECK(two.p_value == doctest::Approx(std::min(1.0, 2.0 * std::min(g.p_value, l.p_value))));
    CHECK(g.p_value + l.p_value == doctest::Approx(1.0));
  }
}

TEST_CASE("test errors") {
  CHECK_THROWS_AS(one_sample_test(synthetic(1.0, 0.0, 10), 0.0, Alternative::TwoSided, 0.05), Error);
  try {
    two_sample_test(synthetic(1.0, 1.0, 10, 0.3), synthetic(1.0, 1.0, 10, 0.5),
                    Alternative::TwoSided, 0.05);
    FAIL("expected AlphaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlphaMismatch);
  }
  CHECK_THROWS_AS(normal_test(1.0, Alternative::Greater, 1.5), Error);
  CHECK(parse_alternative("two-sided") == Alternative::TwoSided);
  CHECK_THROWS_AS(parse_alternative("sideways"), Error);
}

TEST_CASE("two-sample statistic is antisymmetric") {
  const auto a = synthetic(1.2, 2.0, 30);
  const auto b = synthetic(0.7, 3.0, 45);
  const auto ab = two_sample_test(a, b, Alternative::TwoSided, 0.05);
  const auto ba = two_sample_test(b, a, Alternative::TwoSided, 0.05);
  CHECK(ab.statistic == -ba.statistic);
  CHECK(ab.statistic == doctest::Approx(0.5 / std::sqrt(2.0 / 30 + 3.0 / 45)));
  CHECK(two_sample_test(a, a, Alternative::TwoSided, 0.05).statistic == 0.0);
}

TEST_CASE("power formulas") {
  CHECK(approx_power_one(0.3, 0.0, 1.0, 100, 0.05) == doctest::Approx(0.9123).epsilon(5e-4));
  CHECK(contiguous_power_one(2.0, 4.0, 0.05) == doctest::Approx(0.2595).epsilon(5e-4));
  CHECK(approx_power_two(0.4, 0.0, 1.0, 1.0, 100, 100, 0.05) == doctest::Approx(0.8816).epsilon(5e-4));
  CHECK(contiguous_power_two(1.0, 1.0, 3.0, 0.5, 0.05) == doctest::Approx(0.1744).epsilon(5e-4));

  for (double tau : {0.01, 0.05, 0.1}) {
    CHECK(std::fabs(approx_power_one(0.7, 0.7, 2.0, 50, tau) - tau) < 1e-15);
    CHECK(std::fabs(contiguous_power_one(0.0, 2.0, tau) - tau) < 1e-15);
    CHECK(std::fabs(approx_power_two(0.2, 0.2, 1.0, 2.0, 40, 60, tau) - tau) < 1e-15);
    CHECK(std::fabs(contiguous_power_two(0.0, 1.0, 2.0, 0.3, tau) - tau) < 1e-15);
  }
  CHECK(approx_power_one(0.1, 0.0, 1.0, 1e6, 0.05) > 0.999);
  CHECK(contiguous_power_one(1e3, 1.0, 0.05) == doctest::Approx(1.0));
  CHECK(contiguous_power_two(2.0, 3.0, 3.0, 0.5, 0.05) ==
        doctest::Approx(contiguous_power_one(2.0, 3.0, 0.05)).epsilon(1e-15));

  double prev = 0.0;
  for (double gap = 0.0; gap <= 1.0; gap += 0.1) {
    const double p = approx_power_one(gap, 0.0, 1.0, 50, 0.05);
    CHECK(p > prev);
    prev = p;
  }
  CHECK(approx_power_one(0.2, 0.0, 1.0, 80, 0.05) > approx_power_one(0.2, 0.0, 1.0, 40, 0.05));
  CHECK(approx_power_two(0.3, 0.0, 1.0, 1.0, 400, 400, 0.05) >
        approx_power_two(0.3, 0.0, 1.0, 1.0, 100, 100, 0.05));
  CHECK(contiguous_power_one(1.0, 1.0, 0.05) < contiguous_power_one(1.5, 1.0, 0.05));
  CHECK_THROWS_AS(contiguous_power_two(1.0, 1.0, 1.0, 1.0, 0.05), Error);
}

TEST_CASE("two-sample test detects a unit shift") {
  SimConfig c;
  c.t1 = 400;
  c.t2 = 320;
  int rejections = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    SimConfig c2 = c;
    c2.seed = c.seed + 1;
    const auto shifted = gen_panel(c, r, 1.0);
    const auto plain = gen_panel(c2, r);
    const auto e1 = estimate_ate(shifted.panel, 0.3, AggregateKind::Mean);
    const auto e2 = estimate_ate(plain.panel, 0.3, AggregateKind::Mean);
    rejections += two_sample_test(e1, e2, Alternative::TwoSided, 0.05).reject;
  }
  CHECK(rejections >= 198);
}
