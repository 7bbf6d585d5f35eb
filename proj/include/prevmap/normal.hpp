#pragma once

namespace prevmap {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0,1): rational initial guess
/// refined by Halley steps on erfc, accurate to ~1e-15.
double normal_quantile(double p);

/// z_{alpha/2}: the upper alpha/2 quantile.
inline double upper_half_alpha_quantile(double alpha) { return normal_quantile(1.0 - alpha / 2.0); }

}  // namespace prevmap
