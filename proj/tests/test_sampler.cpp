#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "weibayes/error.hpp"
#include "weibayes/priors.hpp"
#include "weibayes/rng.hpp"
#include "weibayes/sampler.hpp"
#include "weibayes/special.hpp"

using namespace weibayes;

namespace {

class StdNormal final : public LogDensity {
 public:
  explicit StdNormal(std::size_t d) : d_(d) {}
  std::size_t dimension() const override { return d_; }
  double evaluate(std::span<const double> q, std::span<double> g) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      v -= 0.5 * q[i] * q[i];
      g[i] = -q[i];
    }
    return v;
  }

 private:
  std::size_t d_;
};

SamplerConfig small_config(std::uint64_t seed) {
  SamplerConfig c;
  c.iterations = 600;
  c.warmup = 300;
  c.chains = 4;
  c.seed = seed;
  return c;
}

PhasePoint start(const LogDensity& t, std::vector<double> q, std::vector<double> p) {
  PhasePoint z{std::move(q), std::move(p), std::vector<double>(t.dimension()), 0.0};
  z.log_density = t.evaluate(z.q, z.grad);
  return z;
}

std::vector<std::vector<double>> normal_chains(std::size_t chains, std::size_t len, std::uint64_t seed,
                                               bool same_seed = false) {
  std::vector<std::vector<double>> out(chains, std::vector<double>(len));
  for (std::size_t c = 0; c < chains; ++c) {
    Rng rng(seed, same_seed ? 0 : c);
    for (auto& x : out[c]) x = rng.normal();
  }
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  SamplerConfig c;
  CHECK_NOTHROW(c.validate());
  c.chains = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.chains = 4;
  c.warmup = c.iterations;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.warmup = 10;
  c.target_accept = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  StdNormal t(1);
  SamplerConfig one = small_config(1);
  one.chains = 1;
  CHECK_THROWS_AS(nuts_sample(t, one), ConfigError);
}

TEST_CASE("leapfrog one step on the quadratic potential") {
  StdNormal t(1);
  std::vector<double> m = {1.0};
  PhasePoint z = start(t, {1.0}, {0.0});
  REQUIRE(leapfrog(z, 1.0, t, m));
  CHECK(z.q[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(z.p[0] == doctest::Approx(-0.75).epsilon(1e-15));
}

TEST_CASE("leapfrog is reversible on a Weibull model state") {
  const auto data = sample(WeibullParams(1.5, 1.0), 40, 3);
  const HierarchicalModel model = build_model(PriorKind::Gamma, PriorKind::LogNormal, WeibullParams(1.5, 1.0), 0.05, 0.02);
  const WeibullPosterior target(model, data);
  Rng rng(5);
  std::vector<double> q = model.initial_point(), p(model.dimension()), m(model.dimension());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] += rng.uniform(-0.2, 0.2);
    p[i] = rng.normal();
    m[i] = rng.uniform(0.5, 2.0);
  }
  PhasePoint z = start(target, q, p);
  for (int k = 0; k < 20; ++k) REQUIRE(leapfrog(z, 0.01, target, m));
  for (auto& x : z.p) x = -x;
  for (int k = 0; k < 20; ++k) REQUIRE(leapfrog(z, 0.01, target, m));
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(std::abs(z.q[i] - q[i]) < 1e-10);
    CHECK(std::abs(-z.p[i] - p[i]) < 1e-10);
  }
}

TEST_CASE("energy error scales with the square of the step") {
  StdNormal t(1);
  std::vector<double> m = {1.0};
  auto drift = [&](double eps) {
    PhasePoint z = start(t, {1.0}, {0.5});
    const double h0 = hamiltonian(z, m);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      leapfrog(z, eps, t, m);
      worst = std::max(worst, std::abs(hamiltonian(z, m) - h0));
    }
    return worst;
  };
  const double ratio = drift(0.1) / drift(0.05);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("split R-hat examples") {
  const auto same = normal_chains(4, 1000, 17, true);
  CHECK(std::abs(r_hat(same) - 1.0) < 0.01);

  auto apart = normal_chains(2, 1000, 17);
  for (auto& x : apart[1]) x += 10.0;
  CHECK(r_hat(apart) > 3.0);

  auto chains = normal_chains(4, 500, 3);
  const double r1 = r_hat(chains);
  std::reverse(chains.begin(), chains.end());
  CHECK(r_hat(chains) == doctest::Approx(r1).epsilon(1e-14));
  CHECK(r1 >= 1.0 - 1e-3);

  CHECK_THROWS_AS(r_hat(std::vector<std::vector<double>>{{1.0, 2.0, 3.0, 4.0}}), DiagnosticError);
  CHECK_THROWS_AS(r_hat(std::vector<std::vector<double>>(2, std::vector<double>(8, 1.0))), DiagnosticError);
}

TEST_CASE("effective sample size") {
  const auto iid = normal_chains(4, 2000, 21);
  CHECK(ess(iid) == doctest::Approx(8000.0).epsilon(0.15));

  // AR(1) with phi = 0.9: ESS ~ N (1 - phi) / (1 + phi)
  std::vector<std::vector<double>> ar(4, std::vector<double>(5000));
  for (std::size_t c = 0; c < 4; ++c) {
    Rng rng(33, c);
    double x = rng.normal() / std::sqrt(1 - 0.81);
    for (auto& v : ar[c]) v = x = 0.9 * x + rng.normal();
  }
  CHECK(ess(ar) == doctest::Approx(20000.0 * 0.1 / 1.9).epsilon(0.25));
}

TEST_CASE("standard normal calibration") {
  StdNormal t(2);
  SamplerConfig c;
  c.seed = 7;
  const PosteriorDraws d = nuts_sample(t, c);
  CHECK(d.chains == 4);
  CHECK(d.kept == 1000);
  CHECK(d.divergence_count == 0);
  CHECK_FALSE(d.has_weibull());
  for (std::size_t k = 0; k < 2; ++k) {
    const auto series = d.coordinate(k);
    double sum = 0.0, sq = 0.0;
    for (const auto& ch : series)
      for (double x : ch) {
        sum += x;
        sq += x * x;
      }
    const double n = 4000.0;
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double mcse = std::sqrt(var / ess(series));
    CHECK(std::abs(mean) < 3.0 * mcse);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r_hat(series) < 1.01);

    std::vector<double> pooled;
    for (const auto& ch : series) pooled.insert(pooled.end(), ch.begin(), ch.end());
    std::sort(pooled.begin(), pooled.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      const double f = normal_cdf(pooled[i]);
      ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    CHECK(ks < 0.02);
  }
  CHECK(d.accept_stat == doctest::Approx(0.8).epsilon(0.1));
}

TEST_CASE("sampling is deterministic and independent of threading") {
  StdNormal t(3);
  SamplerConfig c = small_config(99);
  const PosteriorDraws a = nuts_sample(t, c);
  c.parallel = false;
  const PosteriorDraws b = nuts_sample(t, c);
  CHECK(a.unconstrained == b.unconstrained);
  CHECK(a.energy == b.energy);
  c.seed = 100;
  const PosteriorDraws other = nuts_sample(t, c);
  CHECK(other.unconstrained != a.unconstrained);
}

TEST_CASE("divergences grow with a fixed step size") {
  StdNormal t(2);
  std::vector<std::size_t> counts;
  for (double eps : {0.3, 1.9, 2.5}) {
    SamplerConfig c = small_config(4);
    c.fixed_step_size = eps;
    try {
      counts.push_back(nuts_sample(t, c).divergence_count);
    } catch (const SamplerError&) {
      counts.push_back(c.chains * c.kept());
    }
  }
  CHECK(counts[0] == 0);
  CHECK(counts[0] <= counts[1]);
  CHECK(counts[1] <= counts[2]);
  CHECK(counts[2] > 0);
}

TEST_CASE("summaries of degenerate draws") {
  PosteriorDraws d;
  d.chains = 2;
  d.kept = 10;
  d.dim = 2;
  d.shape.assign(20, 1.5);
  d.scale.assign(20, 2.0);
  for (int i = 0; i < 20; ++i) {
    d.unconstrained.push_back(std::log(1.5));
    d.unconstrained.push_back(std::log(2.0));
  }
  const PosteriorSummary s = summarize(d, 30);
  CHECK(s.mean_estimate.shape() == doctest::Approx(1.5));
  CHECK(s.var_shape == doctest::Approx(0.0));
  CHECK(s.r_hat[0] == 1.0);
  CHECK(s.ess[0] == 20.0);
  CHECK(s.total_asymptotic_variance == doctest::Approx(total_asymptotic_variance(WeibullParams(1.5, 2.0), 30)));

  std::fill(d.shape.begin() + 10, d.shape.end(), 1.7);
  const PosteriorSummary frozen = summarize(d, 30);
  CHECK(std::isinf(frozen.r_hat[0]));
}

TEST_CASE("Weibull posterior concentrates near the truth") {
  const auto data = sample(WeibullParams(1.5, 1.0), 100, 2024);
  const BootstrapSummary bs = bootstrap(data, ClassicalMethod::MLE, 200, 1);
  const HierarchicalModel model = build_model(PriorKind::Gamma, PriorKind::Gamma, bs);
  const PosteriorDraws d = nuts_sample(model, data, small_config(11));
  REQUIRE(d.has_weibull());
  const PosteriorSummary s = summarize(d, data.size());
  CHECK(std::abs(s.mean_estimate.shape() - 1.5) < 3.0 * std::sqrt(s.var_shape));
  CHECK(std::abs(s.mean_estimate.scale() - 1.0) < 3.0 * std::sqrt(s.var_scale));
  std::ostringstream os;
  write_draws_csv(os, d);
  const std::string csv = os.str();
  CHECK(csv.rfind("chain,iteration,shape,scale,energy,divergent\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(1 + d.chains * d.kept));
}
