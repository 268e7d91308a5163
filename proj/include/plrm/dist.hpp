#pragma once

namespace plrm {

/// Standard normal CDF (erfc-based, accurate to ~1e-15).
double normal_cdf(double z);

/// Standard normal quantile for p in (0,1); rational approximation
/// polished by Halley steps so that |cdf(quantile(p)) - p| < 1e-12.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
/// continued fraction otherwise.
double gamma_p(double a, double x);

/// Central chi-square CDF with r degrees of freedom.
double chisq_cdf(double x, int r);

/// Chi-square quantile: monotone bracketing plus Newton refinement,
/// |cdf(quantile(p)) - p| < 1e-10.
double chisq_quantile(double p, int r);

/// Noncentral chi-square CDF via the Poisson mixture
/// sum_m e^{-delta/2} (delta/2)^m / m! * ChiSqCDF(x; r + 2m),
/// truncated once the remaining Poisson tail is below 1e-14.
double noncentral_chisq_cdf(double x, int r, double delta);

}  // namespace plrm
