#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "weibayes/adaptive.hpp"
#include "weibayes/error.hpp"
#include "weibayes/rng.hpp"

using namespace weibayes;

namespace {

PosteriorDraws point_mass(double shape, double scale, std::size_t n = 40) {
  PosteriorDraws d;
  d.chains = 2;
  d.kept = n / 2;
  d.dim = 2;
  d.shape.assign(n, shape);
  d.scale.assign(n, scale);
  for (std::size_t i = 0; i < n; ++i) {
    d.unconstrained.push_back(std::log(shape));
    d.unconstrained.push_back(std::log(scale));
  }
  return d;
}

std::vector<double> weibull_draws(double shape, double scale, std::size_t n, std::uint64_t seed) {
  const auto s = sample(WeibullParams(shape, scale), n, seed);
  return {s.times().begin(), s.times().end()};
}

SamplerConfig quick(std::uint64_t seed) {
  SamplerConfig c;
  c.iterations = 500;
  c.warmup = 250;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("predictive of a point-mass posterior is the Weibull itself") {
  auto pred = posterior_predictive_sample(point_mass(1.0, 1.0), 10000, 5);
  REQUIRE(pred.size() == 10000);
  std::sort(pred.begin(), pred.end());
  double ks = 0.0;
  const double n = 10000.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double f = 1.0 - std::exp(-pred[i]);
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(ks < 0.02);

  const auto p2 = posterior_predictive_sample(point_mass(2.0, 3.0), 20000, 6);
  double mean = 0.0;
  for (double x : p2) mean += x;
  mean /= p2.size();
  const WeibullParams w(2.0, 3.0);
  CHECK(std::abs(mean - weibull_mean(w)) < 4.0 * std::sqrt(weibull_variance(w) / p2.size()));

  CHECK(posterior_predictive_sample(point_mass(1.0, 1.0), 50, 9) == posterior_predictive_sample(point_mass(1.0, 1.0), 50, 9));
  CHECK_THROWS_AS(posterior_predictive_sample(point_mass(1.0, 1.0), 0, 1), DomainError);
}

TEST_CASE("binned KL divergence") {
  const auto data = weibull_draws(1.4, 2.0, 2000, 1);
  // resampling the data itself
  Rng rng(3);
  std::vector<double> resampled(20000);
  for (auto& x : resampled) x = data[rng.index(data.size())];
  CHECK(kl_estimate(resampled, data) < 0.05);

  const auto p = weibull_draws(0.5, 1.0, 10000, 4);
  const auto q = weibull_draws(3.0, 1.0, 10000, 5);
  CHECK(kl_estimate(q, p) > 0.5);

  // common rescaling
  std::vector<double> p7 = p, q7 = q;
  for (auto& x : p7) x *= 7.0;
  for (auto& x : q7) x *= 7.0;
  CHECK(kl_estimate(q7, p7) == doctest::Approx(kl_estimate(q, p)).epsilon(1e-9));

  CHECK(kl_estimate(q, std::vector<double>(q.begin(), q.begin() + 100)) >= 0.0);
  CHECK_THROWS_AS(kl_estimate(std::vector<double>{}, p), DomainError);
  CHECK_THROWS_AS(kl_estimate(std::vector<double>(49, 1.0), p), DomainError);
  CHECK_THROWS_AS(kl_estimate(q, std::vector<double>{1, 2, 3, 4}), DomainError);
  CHECK_THROWS_AS(kl_estimate(q, p, 0), ConfigError);
}

TEST_CASE("refit moment matches the posterior marginals") {
  const HierarchicalModel m = build_model(PriorKind::Gamma, PriorKind::LogNormal, WeibullParams(1.5, 2.0), 0.1, 0.2);
  PosteriorSummary post;
  post.mean_estimate = WeibullParams(1.4, 2.1);
  post.var_shape = 0.01;
  post.var_scale = 0.04;
  const HierarchicalModel r = refit_model(m, post, 0.25);
  CHECK(r.shape_kind == m.shape_kind);
  CHECK(r.scale_kind == m.scale_kind);
  const auto g = moment_match(PriorKind::Gamma, 1.4, 0.01);
  CHECK(r.shape_hypers[0].init == doctest::Approx(g[0]));
  CHECK(r.shape_hypers[1].init == doctest::Approx(g[1]));
  // Gamma(a, b) has variance a / b^2
  CHECK(r.shape_hypers[0].init / (r.shape_hypers[1].init * r.shape_hypers[1].init) == doctest::Approx(0.01));
  CHECK(r.shape_hypers[0].hyperprior.location == doctest::Approx(std::log(g[0])));
  CHECK(r.shape_hypers[0].hyperprior.scale == doctest::Approx(0.25));
  CHECK(r.init == post.mean_estimate);
  CHECK_THROWS_AS(refit_model(m, post, 0.0), ConfigError);
}

TEST_CASE("adapt bookkeeping and determinism") {
  const auto data = sample(WeibullParams(1.5, 2.0), 60, 8);
  const HierarchicalModel m =
      build_model(PriorKind::Gamma, PriorKind::Gamma, bootstrap(data, ClassicalMethod::MLE, 200, 1));
  const AdaptiveState one = adapt(data, m, 1, quick(12));
  CHECK(one.round == 1);
  CHECK(one.history.size() == 1);
  CHECK(one.kl_estimate >= 0.0);

  AdaptiveOptions opts;
  opts.min_improvement = 10.0;  // every round counts as stalled
  const AdaptiveState early = adapt(data, m, 6, quick(12), opts);
  CHECK(early.stopped_early);
  CHECK(early.history.size() == early.round);
  CHECK(early.round == 3);

  const AdaptiveState again = adapt(data, m, 1, quick(12));
  CHECK(again.kl_estimate == one.kl_estimate);
  CHECK(again.history[0].mean == one.history[0].mean);

  std::ostringstream os;
  write_trace_csv(os, early);
  const std::string trace = os.str();
  CHECK(trace.rfind("round,kl,shape,scale\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 4);
  CHECK_THROWS_AS(adapt(data, m, 0, quick(1)), ConfigError);
}

TEST_CASE("refit prior concentrates on large samples") {
  const auto data = sample(WeibullParams(1.5, 2.0), 2000, 21);
  const HierarchicalModel m =
      build_model(PriorKind::Gamma, PriorKind::Gamma, bootstrap(data, ClassicalMethod::MLE, 200, 2));
  AdaptiveOptions opts;
  opts.min_improvement = -1.0;
  SamplerConfig c;
  c.seed = 30;
  const AdaptiveState s = adapt(data, m, 3, c, opts);
  REQUIRE(s.history.size() == 3);
  // 15% covers the Monte Carlo error of a variance from ~1000 effective draws
  for (std::size_t r = 1; r < s.history.size(); ++r) {
    CHECK(s.history[r].var_shape <= 1.15 * s.history[r - 1].var_shape);
    CHECK(s.history[r].var_scale <= 1.15 * s.history[r - 1].var_scale);
  }
  CHECK(s.history.back().var_shape < s.history.front().var_shape);
}
