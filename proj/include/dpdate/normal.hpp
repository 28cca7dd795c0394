#pragma once

// Standard normal distribution helpers.

namespace dpdate::normal {

inline constexpr double kPi = 3.14159265358979323846;

double pdf(double x);
double cdf(double x);
/// Upper tail 1 - cdf(x), accurate for large x.
double sf(double x);
/// Inverse of cdf on (0, 1); Wichura's AS241 (PPND16), relative error ~1e-16.
double quantile(double p);
/// Upper quantile z_tau with P(Z > z_tau) = tau.
double upper_quantile(double tau);
/// k-th raw moment of N(0,1): 0 for odd k, (k-1)!! for even k.
double moment(int k);

}  // namespace dpdate::normal
