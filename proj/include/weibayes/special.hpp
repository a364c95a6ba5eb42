#pragma once

// Special functions used across the library: incomplete gamma functions,
// digamma, and tail-stable normal CDF helpers.

namespace weibayes {

/// Lower incomplete gamma integral, int_0^z t^(a-1) e^-t dt. Requires a > 0, z >= 0.
double lower_incomplete_gamma(double a, double z);

/// Upper incomplete gamma integral, int_z^inf t^(a-1) e^-t dt. Requires a > 0, z >= 0.
double upper_incomplete_gamma(double a, double z);

/// Regularized forms P = lower / Gamma(a) and Q = upper / Gamma(a).
double gamma_p(double a, double z);
double gamma_q(double a, double z);

/// log of the upper incomplete gamma integral. Finite for any finite z,
/// including z far beyond the exp() overflow threshold.
double log_upper_incomplete_gamma(double a, double z);

/// z + log Gamma(a, z). This is the log of e^z Gamma(a, z), the quantity
/// mean residual life needs; it stays bounded for large z.
double log_scaled_upper_incomplete_gamma(double a, double z);

double digamma(double x);

/// Standard normal CDF and log CDF; log_normal_cdf is accurate deep in the lower tail.
double normal_cdf(double x);
double log_normal_cdf(double x);
/// phi(x) / Phi(x), the inverse Mills ratio.
double normal_hazard_ratio(double x);

}  // namespace weibayes
