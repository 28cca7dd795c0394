#include "dpdate/density.hpp"

#include <cmath>
#include <sstream>

#include "dpdate/errors.hpp"
#include "dpdate/normal.hpp"
#include "dpdate/quadrature.hpp"

namespace dpdate {

ErrorDensity::ErrorDensity(Kind kind, Fn density, Fn score, double lo, double hi,
                           std::string name)
    : kind_(kind),
      density_(std::move(density)),
      score_(std::move(score)),
      lo_(lo),
      hi_(hi),
      name_(std::move(name)) {}

ErrorDensity ErrorDensity::standard_normal() {
  return ErrorDensity(
      Kind::StandardNormal, [](double s) { return normal::pdf(s); },
      [](double s) { return -s; }, -40.0, 40.0, "standard_normal");
}

ErrorDensity ErrorDensity::custom(Fn density, Fn score, double lo, double hi,
                                  std::string name, double moment_tol) {
  if (!density || !score) {
    fail(ErrorCode::InvalidArgument, "custom density needs f and its score");
  }
  if (!(hi > lo)) fail(ErrorCode::InvalidArgument, "empty density support");
  ErrorDensity out(Kind::Custom, std::move(density), std::move(score), lo, hi,
                   std::move(name));
  const auto& f = out.density_;
  const double mass = integrate_gk15(f, lo, hi).value;
  const double mean = integrate_gk15([&](double s) { return s * f(s); }, lo, hi).value;
  const double second =
      integrate_gk15([&](double s) { return s * s * f(s); }, lo, hi).value;
  if (std::fabs(mass - 1.0) > moment_tol || std::fabs(mean) > moment_tol ||
      std::fabs(second - 1.0) > moment_tol) {
    std::ostringstream msg;
    msg << "custom density '" << out.name_
        << "' must have unit mass, zero mean and unit variance; got mass " << mass
        << ", mean " << mean << ", second moment " << second;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return out;
}

double ErrorDensity::pdf(double s) const { return density_(s); }

double ErrorDensity::score(double s) const { return score_(s); }

double ErrorDensity::pdf_pow(double s, double alpha) const {
  if (is_normal()) {
    return std::exp(-0.5 * alpha * (s * s + std::log(2.0 * normal::kPi)));
  }
  return std::pow(density_(s), alpha);
}

double ErrorDensity::mass_power(double alpha) const {
  if (is_normal()) {
    return std::pow(2.0 * normal::kPi, -0.5 * alpha) / std::sqrt(1.0 + alpha);
  }
  return integrate_gk15([&](double s) { return std::pow(density_(s), 1.0 + alpha); },
                        lo_, hi_)
      .value;
}

ErrorDensity laplace_density() {
  const double b = 1.0 / std::sqrt(2.0);
  return ErrorDensity::custom(
      [b](double s) { return std::exp(-std::fabs(s) / b) / (2.0 * b); },
      [b](double s) { return s > 0.0 ? -1.0 / b : (s < 0.0 ? 1.0 / b : 0.0); },
      -60.0, 60.0, "laplace");
}

}  // namespace dpdate
