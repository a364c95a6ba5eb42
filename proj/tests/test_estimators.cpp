#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "weibayes/error.hpp"
#include "weibayes/estimators.hpp"
#include "weibayes/rng.hpp"
#include "weibayes/special.hpp"

using namespace weibayes;

namespace {

// Profile score in the shape: sum t^b ln t / sum t^b - 1/b - mean ln t.
double profile_score(const LifetimeSample& d, double b) {
  double s0 = 0, s1 = 0, sl = 0;
  for (double t : d.times()) {
    s0 += std::pow(t, b);
    s1 += std::pow(t, b) * std::log(t);
    sl += std::log(t);
  }
  return s1 / s0 - 1.0 / b - sl / d.size();
}

}  // namespace

TEST_CASE("MLE solves the score equations") {
  const auto data = sample(WeibullParams(1.5, 3.0), 80, 11);
  const WeibullParams fit = fit_mle(data);
  CHECK(std::abs(profile_score(data, fit.shape())) < 1e-10);
  double s0 = 0;
  for (double t : data.times()) s0 += std::pow(t, fit.shape());
  CHECK(fit.scale() == doctest::Approx(std::pow(s0 / data.size(), 1.0 / fit.shape())).epsilon(1e-12));
  const auto terms = log_likelihood_terms(data, fit.shape(), fit.scale());
  CHECK(std::abs(terms.d_shape) < 1e-7 * data.size());
  CHECK(std::abs(terms.d_scale) < 1e-7 * data.size());
}

TEST_CASE("estimators recover parameters on large samples") {
  for (double shape : {0.5, 1.0, 1.5, 3.0}) {
    const auto data = sample(WeibullParams(shape, 2.0), 20000, 7 + static_cast<std::uint64_t>(shape * 10));
    for (auto m : {ClassicalMethod::MLE, ClassicalMethod::Moments, ClassicalMethod::OLSRegression}) {
      const WeibullParams f = fit(m, data);
      CHECK(f.shape() == doctest::Approx(shape).epsilon(0.05));
      CHECK(f.scale() == doctest::Approx(2.0).epsilon(0.05));
    }
  }
}

TEST_CASE("estimators are scale equivariant") {
  const auto data = sample(WeibullParams(0.8, 1.0), 40, 3);
  const auto scaled = data.scaled(25.0);
  for (auto m : {ClassicalMethod::MLE, ClassicalMethod::Moments, ClassicalMethod::OLSRegression}) {
    const WeibullParams a = fit(m, data), b = fit(m, scaled);
    CHECK(b.shape() == doctest::Approx(a.shape()).epsilon(1e-8));
    CHECK(b.scale() == doctest::Approx(25.0 * a.scale()).epsilon(1e-8));
  }
}

TEST_CASE("moments match mean and coefficient of variation") {
  const LifetimeSample data({1.0, 2.0, 3.0, 4.0, 10.0});
  const WeibullParams f = fit_moments(data);
  CHECK(weibull_mean(f) == doctest::Approx(data.mean()).epsilon(1e-9));
  CHECK(weibull_variance(f) == doctest::Approx(data.variance()).epsilon(1e-8));
}

TEST_CASE("regression on exact plotting positions recovers the line") {
  // t_i placed at the Weibull quantiles of the Bernard positions
  const WeibullParams p(2.2, 7.0);
  std::vector<double> t;
  const int n = 12;
  for (int i = 1; i <= n; ++i) t.push_back(quantile((i - 0.3) / (n + 0.4), p));
  const WeibullParams f = fit_ols(LifetimeSample(t));
  CHECK(f.shape() == doctest::Approx(2.2).epsilon(1e-10));
  CHECK(f.scale() == doctest::Approx(7.0).epsilon(1e-10));
}

TEST_CASE("degenerate samples are rejected") {
  const LifetimeSample same({2.0, 2.0, 2.0});
  CHECK_THROWS_AS(fit_mle(same), EstimationError);
  CHECK_THROWS_AS(fit_moments(same), EstimationError);
  CHECK_THROWS_AS(fit_ols(same), EstimationError);
  CHECK_THROWS_AS(fit_mle(LifetimeSample({1.0})), EstimationError);
}

// Entries use the four-digit constants 1.8237 and 0.4228.
TEST_CASE("Fisher information at the unit point") {
  const double g = 0.5772156649015329;
  const double l2 = 1.6449340668482264 + g * g;  // Gamma''(1)
  const FisherInfo fi = fisher_information(WeibullParams(1.0, 1.0), 1);
  CHECK(fi.matrix(0, 0) == doctest::Approx(1.0 + l2 - 2.0 * g).epsilon(5e-5));
  CHECK(fi.matrix(0, 0) == doctest::Approx(1.8237).epsilon(1e-4));
  CHECK(fi.matrix(0, 1) == doctest::Approx(-(1.0 - g)).epsilon(5e-5));
  CHECK(fi.matrix(1, 0) == fi.matrix(0, 1));
  CHECK(fi.matrix(1, 1) == doctest::Approx(1.0));

  // the rounded covariance constants are the inverse of the unit information
  const Matrix2 inv = fi.matrix.inverse();
  const Matrix2 cov = asymptotic_covariance(WeibullParams(1.0, 1.0), 1);
  CHECK(cov(0, 0) == doctest::Approx(inv(0, 0)).epsilon(1e-4));
  CHECK(cov(0, 1) == doctest::Approx(inv(0, 1)).epsilon(2e-4));
  CHECK(cov(1, 1) == doctest::Approx(inv(1, 1)).epsilon(1e-4));
}

TEST_CASE("Fisher information scales with n, shape and scale") {
  const WeibullParams p(1.7, 3.0);
  const FisherInfo a = fisher_information(p, 1), b = fisher_information(p, 10);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(b.matrix(r, c) == doctest::Approx(10.0 * a.matrix(r, c)));
  const Matrix2 prod = a.matrix * asymptotic_covariance(p, 1);
  CHECK(prod(0, 0) == doctest::Approx(1.0).epsilon(5e-4));
  CHECK(prod(1, 1) == doctest::Approx(1.0).epsilon(5e-4));
  CHECK(std::abs(prod(0, 1)) < 5e-4 * 3.0);
  CHECK_THROWS_AS(fisher_information(p, 0), DomainError);
}

TEST_CASE("total asymptotic variance") {
  const WeibullParams p(1.43, 40.34);
  const double want = (1.1087 * 40.34 * 40.34 / (1.43 * 1.43) + 0.6079 * 1.43 * 1.43 - 2 * 0.2570 * 40.34) / 87.0;
  CHECK(total_asymptotic_variance(p, 87) == doctest::Approx(want).epsilon(1e-14));
  // positive definite quadratic form: never negative for valid parameters
  for (double b : {0.1, 0.5, 1.0, 2.0, 5.0})
    for (double a : {0.01, 0.5, 1.0, 2.0, 100.0}) CHECK(total_asymptotic_variance(WeibullParams(b, a), 1) > 0.0);
}

TEST_CASE("bootstrap is deterministic and order-insensitive") {
  const auto data = sample(WeibullParams(1.2, 2.0), 30, 5);
  const BootstrapSummary a = bootstrap(data, ClassicalMethod::MLE, 200, 42);
  const BootstrapSummary b = bootstrap(data, ClassicalMethod::MLE, 200, 42);
  CHECK(a.mean_estimate == b.mean_estimate);
  CHECK(a.var_shape == b.var_shape);
  CHECK(a.replicates == 200);
  CHECK(a.var_shape > 0.0);
  CHECK(a.total_asymptotic_variance == doctest::Approx(total_asymptotic_variance(a.mean_estimate, 30)));

  std::vector<WeibullParams> reps = {WeibullParams(1.0, 2.0), WeibullParams(1.2, 2.5), WeibullParams(0.9, 1.5)};
  const BootstrapSummary s1 = summarize_replicates(reps, 30);
  std::reverse(reps.begin(), reps.end());
  const BootstrapSummary s2 = summarize_replicates(reps, 30);
  CHECK(s1.mean_estimate.shape() == doctest::Approx(s2.mean_estimate.shape()).epsilon(1e-15));
  CHECK(s1.var_scale == doctest::Approx(s2.var_scale).epsilon(1e-15));
  CHECK(s1.mean_estimate.shape() == doctest::Approx(31.0 / 30.0));
  CHECK(s1.var_scale == doctest::Approx(0.25).epsilon(1e-12));  // sample variance of {2, 2.5, 1.5}

  CHECK_THROWS_AS(bootstrap(data, ClassicalMethod::MLE, 99, 1), DomainError);
  CHECK_THROWS_AS(summarize_replicates(std::vector<WeibullParams>{WeibullParams(1, 1)}, 3), BootstrapError);
}

TEST_CASE("bootstrap on a two-valued sample fails loudly") {
  // many resamples are constant, so more than 10% of refits fail
  const LifetimeSample data({1.0, 1.0, 1.0, 1.0, 2.0});
  CHECK_THROWS_AS(bootstrap(data, ClassicalMethod::MLE, 200, 3), BootstrapError);
}

TEST_CASE("Epstein test") {
  // strongly increasing hazard
  const auto ihr = sample(WeibullParams(3.0, 1.0), 100, 8);
  CHECK(epstein_test(ihr).verdict == HazardVerdict::IHR);
  const auto dhr = sample(WeibullParams(0.4, 1.0), 100, 8);
  CHECK(epstein_test(dhr).verdict == HazardVerdict::DHR);
  const EpsteinResult r = epstein_test(ihr);
  CHECK(r.p_value == doctest::Approx(2.0 * normal_cdf(-std::abs(r.statistic))));
  // scale invariant
  CHECK(epstein_test(ihr.scaled(7.0)).statistic == doctest::Approx(r.statistic).epsilon(1e-12));
  CHECK_THROWS_AS(epstein_test(LifetimeSample({1.0, 2.0, 3.0})), DomainError);

  // rejection rates under the null
  int upper = 0, lower = 0;
  for (int i = 0; i < 400; ++i) {
    const auto v = epstein_test(sample(WeibullParams(1.0, 1.0), 50, derive_seed(123, i))).verdict;
    upper += v == HazardVerdict::IHR;
    lower += v == HazardVerdict::DHR;
  }
  CHECK(upper / 400.0 == doctest::Approx(0.05).epsilon(0.6));
  CHECK(lower / 400.0 == doctest::Approx(0.05).epsilon(0.6));
}
