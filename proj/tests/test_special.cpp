#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "weibayes/error.hpp"
#include "weibayes/special.hpp"

using namespace weibayes;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

}  // namespace

TEST_CASE("incomplete gamma closed forms") {
  CHECK(lower_incomplete_gamma(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
  CHECK(upper_incomplete_gamma(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(lower_incomplete_gamma(3.0, 0.0) == 0.0);
  CHECK(upper_incomplete_gamma(3.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  // Gamma(1/2, z) = sqrt(pi) erfc(sqrt(z))
  for (double z : {0.01, 0.3, 1.0, 4.0, 30.0}) {
    CHECK(rel(upper_incomplete_gamma(0.5, z), std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(z))) < 1e-12);
  }
  CHECK(rel(lower_incomplete_gamma(0.5, 800.0), std::sqrt(std::numbers::pi)) < 1e-14);
}

TEST_CASE("lower plus upper equals the complete gamma on a 200-point grid") {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.05 * std::pow(1.6, i);  // 0.05 .. ~380
    for (int j = 0; j < 10; ++j) {
      const double z = (j == 0) ? 0.0 : 0.01 * std::pow(3.0, j);  // up to ~197
      const double g = std::tgamma(a);
      if (!std::isfinite(g)) continue;
      const double sum = lower_incomplete_gamma(a, z) + upper_incomplete_gamma(a, z);
      worst = std::max(worst, std::abs(sum - g) / g);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("regularized incomplete gamma agrees with Boost.Math") {
  double worst = 0.0;
  for (double a : {0.07, 0.3, 0.7, 1.0, 1.43, 2.5, 7.0, 20.0, 90.0}) {
    for (double z : {1e-4, 0.05, 0.5, 1.0, 2.0, 6.0, 15.0, 40.0, 100.0, 300.0}) {
      const double p = boost::math::gamma_p(a, z);
      const double q = boost::math::gamma_q(a, z);
      if (p > 1e-290) worst = std::max(worst, rel(gamma_p(a, z), p));
      if (q > 1e-290) worst = std::max(worst, rel(gamma_q(a, z), q));
    }
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("log-scaled upper incomplete gamma stays finite far into the tail") {
  for (double a : {0.2, 0.7, 1.0, 3.0}) {
    for (double z : {0.5, 3.0, 50.0, 600.0}) {
      const double want = z + std::log(boost::math::tgamma(a, z));
      CHECK(std::abs(log_scaled_upper_incomplete_gamma(a, z) - want) < 1e-11 * std::max(1.0, std::abs(want)));
    }
    // e^z Gamma(a, z) ~ z^(a-1) (1 + (a-1)/z + (a-1)(a-2)/z^2) for large z
    for (double z : {1e4, 1e7, 1e12}) {
      const double want = (a - 1.0) * std::log(z) + std::log1p((a - 1.0) / z + (a - 1.0) * (a - 2.0) / (z * z));
      const double got = log_scaled_upper_incomplete_gamma(a, z);
      CHECK(std::isfinite(got));
      CHECK(std::abs(got - want) < 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
  CHECK(log_upper_incomplete_gamma(2.0, 1e5) == doctest::Approx(std::log(1e5) - 1e5 + std::log1p(1e-5)).epsilon(1e-13));
}

TEST_CASE("digamma agrees with Boost.Math") {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = 1e-3 * std::pow(1.07, i);
    worst = std::max(worst, std::abs(digamma(x) - boost::math::digamma(x)) / std::max(1.0, std::abs(boost::math::digamma(x))));
  }
  CHECK(worst < 1e-13);
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-14));
}

TEST_CASE("normal cdf helpers") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  for (double x : {-1.0, -10.0, -30.0}) {
    CHECK(log_normal_cdf(x) == doctest::Approx(std::log(0.5 * boost::math::erfc(-x / std::numbers::sqrt2))).epsilon(1e-12));
  }
  // deep tail: log Phi(x) ~ -x^2/2 - log(-x) - log(2 pi)/2
  const double x = -200.0;
  const double lead = -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(std::abs(log_normal_cdf(x) - lead) < 3e-5);
  CHECK(std::isfinite(normal_hazard_ratio(-100.0)));
  CHECK(normal_hazard_ratio(-100.0) == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(lower_incomplete_gamma(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(upper_incomplete_gamma(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(log_scaled_upper_incomplete_gamma(1.0, INFINITY), DomainError);
}
