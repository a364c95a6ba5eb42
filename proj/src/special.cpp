#include "weibayes/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "weibayes/error.hpp"

namespace weibayes {
namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEps = 1e-17;
constexpr double kTiny = 1e-300;

void check_args(double a, double z) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma: shape a must be positive and finite, got " + std::to_string(a));
  }
  if (!(z >= 0.0) || std::isnan(z)) {
    throw DomainError("incomplete gamma: argument z must be nonnegative, got " + std::to_string(z));
  }
}

// log of z^a e^-z / Gamma(a), the common prefactor of both expansions.
double log_prefactor(double a, double z) {
  return a * std::log(z) - z - std::lgamma(a);
}

// Series for P(a, z) divided by the prefactor; valid and fast for z < a + 1.
double p_series_sum(double a, double z) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= z / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum;
  }
  throw EstimationError("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(a, z) divided by the prefactor; z >= a + 1.
double q_continued_fraction(double a, double z) {
  double b = z + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps * 4) return h;
  }
  throw EstimationError("incomplete gamma continued fraction did not converge");
}

bool use_series(double a, double z) { return z < a + 1.0; }

}  // namespace

double gamma_p(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (use_series(a, z)) return std::exp(log_prefactor(a, z)) * p_series_sum(a, z);
  return 1.0 - std::exp(log_prefactor(a, z)) * q_continued_fraction(a, z);
}

double gamma_q(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return 1.0;
  if (std::isinf(z)) return 0.0;
  if (use_series(a, z)) return 1.0 - std::exp(log_prefactor(a, z)) * p_series_sum(a, z);
  return std::exp(log_prefactor(a, z)) * q_continued_fraction(a, z);
}

double lower_incomplete_gamma(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return std::tgamma(a);
  if (use_series(a, z)) return std::exp(a * std::log(z) - z) * p_series_sum(a, z);
  return std::tgamma(a) - std::exp(a * std::log(z) - z) * q_continued_fraction(a, z);
}

double upper_incomplete_gamma(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return std::tgamma(a);
  if (std::isinf(z)) return 0.0;
  if (use_series(a, z)) return std::tgamma(a) - std::exp(a * std::log(z) - z) * p_series_sum(a, z);
  return std::exp(a * std::log(z) - z) * q_continued_fraction(a, z);
}

double log_upper_incomplete_gamma(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return std::lgamma(a);
  if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
  if (use_series(a, z)) {
    return std::lgamma(a) + std::log1p(-std::exp(log_prefactor(a, z)) * p_series_sum(a, z));
  }
  return a * std::log(z) - z + std::log(q_continued_fraction(a, z));
}

double log_scaled_upper_incomplete_gamma(double a, double z) {
  check_args(a, z);
  if (z == 0.0) return std::lgamma(a);
  if (std::isinf(z)) {
    throw DomainError("log_scaled_upper_incomplete_gamma: z must be finite");
  }
  if (use_series(a, z)) return z + log_upper_incomplete_gamma(a, z);
  // The e^-z of the prefactor cancels against the e^z scale.
  return a * std::log(z) + std::log(q_continued_fraction(a, z));
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma: argument must be positive and finite");
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // Asymptotic expansion with Bernoulli-number coefficients through x^-12.
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return result + std::log(x) - 0.5 / x - tail;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x > -37.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Lower tail: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 ...).
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) + std::log(series);
}

double normal_hazard_ratio(double x) {
  const double log_phi = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::exp(log_phi - log_normal_cdf(x));
}

}  // namespace weibayes
