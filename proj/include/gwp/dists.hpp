#pragma once

// Distribution functions used across the library: standard normal CDF and
// quantile, Student's t CDF and quantile, and the bivariate normal
// rectangle probability.

namespace gwp {

// P(Z <= x) for Z ~ N(0,1).
double norm_cdf(double x);

// Inverse of norm_cdf (Wichura's PPND16). Requires 0 < p < 1.
double norm_quantile(double p);

// Regularized incomplete beta function I_x(a, b), 0 <= x <= 1.
double inc_beta(double a, double b, double x);

// P(T <= x) for T ~ t with df degrees of freedom (df > 0, not necessarily
// integer).
double t_cdf(double x, double df);

// Inverse of t_cdf in x. Requires 0 < p < 1.
double t_quantile(double p, double df);

// P(Z1 <= h, Z2 <= k) for standard bivariate normal variables with
// correlation r, |r| <= 1. Absolute accuracy better than 1e-14.
double bvn_cdf(double h, double k, double r);

} // namespace gwp
