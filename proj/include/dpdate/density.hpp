#pragma once

#include <functional>
#include <memory>
#include <string>

namespace dpdate {

/// Standardized error density f (mean zero, unit variance) with its score
/// u(s) = f'(s) / f(s). The standard normal path uses closed forms; a custom
/// density is integrated numerically over its declared support.
class ErrorDensity {
 public:
  enum class Kind { StandardNormal, Custom };

  using Fn = std::function<double(double)>;

  static ErrorDensity standard_normal();

  /// Checks that f integrates to one with mean zero and variance one over
  /// [lo, hi] (tolerance `moment_tol`); throws InvalidArgument otherwise.
  static ErrorDensity custom(Fn density, Fn score, double lo, double hi,
                             std::string name = "custom",
                             double moment_tol = 1e-6);

  Kind kind() const noexcept { return kind_; }
  bool is_normal() const noexcept { return kind_ == Kind::StandardNormal; }
  const std::string& name() const noexcept { return name_; }
  double support_lo() const noexcept { return lo_; }
  double support_hi() const noexcept { return hi_; }

  double pdf(double s) const;
  double score(double s) const;
  /// f(s)^alpha, evaluated in log space for the normal path.
  double pdf_pow(double s, double alpha) const;

  /// M_f^(alpha) = integral of f^(1+alpha).
  double mass_power(double alpha) const;

 private:
  ErrorDensity(Kind kind, Fn density, Fn score, double lo, double hi,
               std::string name);

  Kind kind_;
  Fn density_;
  Fn score_;
  double lo_;
  double hi_;
  std::string name_;
};

/// Unit-variance Laplace density, a heavier-tailed custom example.
ErrorDensity laplace_density();

}  // namespace dpdate
