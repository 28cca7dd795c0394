#pragma once

#include <functional>

namespace dpdate {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 2000;
  /// Uniform panels before adaptive bisection starts.
  int initial_intervals = 32;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration on [lo, hi].
/// Starting from a uniform partition, bisects the interval with the largest
/// error estimate until the total estimate drops below
/// max(abs_tol, rel_tol * |value|). Throws QuadratureFailure when the
/// interval budget runs out first.
QuadratureResult integrate_gk15(const std::function<double(double)>& f,
                                double lo, double hi,
                                const QuadratureOptions& options = {});

}  // namespace dpdate
