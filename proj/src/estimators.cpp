#include "weibayes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "weibayes/error.hpp"
#include "weibayes/kernels.hpp"
#include "weibayes/rng.hpp"
#include "weibayes/special.hpp"

namespace weibayes {
namespace {

constexpr double kShapeLo = 0.01;
constexpr double kShapeHi = 100.0;
constexpr double kScoreTol = 1e-10;

// Euler-Mascheroni based constants, rounded as published.
constexpr double kLambda1 = -0.5772;
constexpr double kLambda2 = 1.9781;

constexpr double kCovShape = 0.6079;
constexpr double kCovCross = 0.2570;
constexpr double kCovScale = 1.1087;

constexpr double kZ95 = 1.6448536269514722;

struct ProfileScore {
  double value;
  double slope;
};

// g(b) = sum t^b log t / sum t^b - 1/b - mean log t, computed on shifted logs.
ProfileScore profile_score(const LifetimeSample& data, double mean_u, double b) {
  const kernels::PowerSums s = kernels::power_sums(data.shifted_log_times(), b);
  const double r1 = s.s1 / s.s0;
  return {r1 - 1.0 / b - mean_u, s.s2 / s.s0 - r1 * r1 + 1.0 / (b * b)};
}

void require_size(const LifetimeSample& data, std::size_t min_n, const char* what) {
  if (data.size() < min_n) {
    throw EstimationError(std::string(what) + ": need at least " + std::to_string(min_n) + " observations");
  }
}

}  // namespace

std::string_view to_string(ClassicalMethod m) noexcept {
  switch (m) {
    case ClassicalMethod::MLE:
      return "MLE";
    case ClassicalMethod::Moments:
      return "Moments";
    case ClassicalMethod::OLSRegression:
      break;
  }
  return "Regression";
}

Matrix2 Matrix2::operator*(const Matrix2& o) const {
  Matrix2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
  return r;
}

Matrix2 Matrix2::inverse() const {
  const double det = determinant();
  if (det == 0.0 || !std::isfinite(det)) throw DomainError("Matrix2::inverse: singular matrix");
  Matrix2 r;
  r.m = {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
  return r;
}

WeibullParams fit_mle(const LifetimeSample& data) {
  require_size(data, 2, "fit_mle");
  if (data.all_equal()) throw EstimationError("fit_mle: degenerate sample, all times equal");

  const auto u = data.shifted_log_times();
  const double n = static_cast<double>(u.size());
  double mean_u = 0.0;
  for (const double x : u) mean_u += x;
  mean_u /= n;

  double lo = kShapeLo;
  double hi = kShapeHi;
  if (profile_score(data, mean_u, lo).value > 0.0 || profile_score(data, mean_u, hi).value < 0.0) {
    throw EstimationError("fit_mle: shape score has no sign change on [0.01, 100]");
  }

  double var_u = 0.0;
  for (const double x : u) var_u += (x - mean_u) * (x - mean_u);
  var_u /= n;
  double b = std::clamp(1.2825 / std::sqrt(var_u), lo * 2.0, hi / 2.0);

  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const ProfileScore g = profile_score(data, mean_u, b);
    if (std::abs(g.value) < kScoreTol) {
      converged = true;
      break;
    }
    // g is increasing in b, so its sign tells which side the root is on.
    if (g.value < 0.0) {
      lo = b;
    } else {
      hi = b;
    }
    double next = b - g.value / g.slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * b) {
      b = next;
      converged = std::abs(profile_score(data, mean_u, b).value) < 1e-8;
      break;
    }
    b = next;
  }
  if (!converged) throw EstimationError("fit_mle: shape iteration did not converge");

  const double s0 = kernels::power_sums(u, b).s0;
  const double log_scale = data.log_max() + std::log(s0 / n) / b;
  return {b, std::exp(log_scale)};
}

WeibullParams fit_moments(const LifetimeSample& data) {
  require_size(data, 2, "fit_moments");
  const double mean = data.mean();
  const double var = data.variance();
  if (!(var > 0.0)) throw EstimationError("fit_moments: zero sample variance");
  const double log_target = std::log1p(var / (mean * mean));

  // log(Gamma(1+2/b) / Gamma(1+1/b)^2) - log(1 + cv^2), decreasing in b.
  auto h = [&](double b) { return std::lgamma(1.0 + 2.0 / b) - 2.0 * std::lgamma(1.0 + 1.0 / b) - log_target; };
  auto cv_residual = [&](double b) {
    return std::exp(std::lgamma(1.0 + 2.0 / b) - 2.0 * std::lgamma(1.0 + 1.0 / b)) - 1.0 - var / (mean * mean);
  };

  double lo = kShapeLo;
  double hi = kShapeHi;
  if (h(lo) < 0.0 || h(hi) > 0.0) {
    throw EstimationError("fit_moments: coefficient of variation outside the solvable range");
  }
  double b = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    b = 0.5 * (lo + hi);
    if (std::abs(cv_residual(b)) < kScoreTol || hi - lo < 1e-15 * b) break;
    if (h(b) > 0.0) {
      lo = b;
    } else {
      hi = b;
    }
  }
  return {b, mean / std::exp(std::lgamma(1.0 + 1.0 / b))};
}

WeibullParams fit_ols(const LifetimeSample& data) {
  require_size(data, 3, "fit_ols");
  const auto t = data.times();
  const std::size_t n = t.size();
  const double denom = static_cast<double>(n) + 0.4;

  std::vector<double> position(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && t[j + 1] == t[i]) ++j;
    // Ranks i+1..j+1 share the mean of their Bernard positions.
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double f = (mean_rank - 0.3) / denom;
    for (std::size_t k = i; k <= j; ++k) position[k] = f;
    i = j + 1;
  }

  double mx = 0.0, my = 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(t[i]);
    y[i] = std::log(-std::log1p(-position[i]));
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("fit_ols: singular regression, all times equal");
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) throw EstimationError("fit_ols: nonpositive regression slope");
  const double intercept = my - slope * mx;
  return {slope, std::exp(-intercept / slope)};
}

WeibullParams fit(ClassicalMethod method, const LifetimeSample& data) {
  switch (method) {
    case ClassicalMethod::MLE:
      return fit_mle(data);
    case ClassicalMethod::Moments:
      return fit_moments(data);
    case ClassicalMethod::OLSRegression:
      break;
  }
  return fit_ols(data);
}

FisherInfo fisher_information(const WeibullParams& p, std::size_t n) {
  if (n == 0) throw DomainError("fisher_information: n must be at least 1");
  const double b = p.shape();
  const double a = p.scale();
  const double nn = static_cast<double>(n);
  FisherInfo out;
  out.n = n;
  const double cross = -nn * (1.0 + kLambda1) / a;
  out.matrix.m = {{{nn * (1.0 + kLambda2 + 2.0 * kLambda1) / (b * b), cross}, {cross, nn * b * b / (a * a)}}};
  return out;
}

Matrix2 asymptotic_covariance(const WeibullParams& p, std::size_t n) {
  if (n == 0) throw DomainError("asymptotic_covariance: n must be at least 1");
  const double b = p.shape();
  const double a = p.scale();
  const double nn = static_cast<double>(n);
  Matrix2 out;
  out.m = {{{kCovShape * b * b / nn, kCovCross * a / nn}, {kCovCross * a / nn, kCovScale * a * a / (b * b * nn)}}};
  return out;
}

double total_asymptotic_variance(const WeibullParams& p, std::size_t n) {
  if (n == 0) throw DomainError("total_asymptotic_variance: n must be at least 1");
  const double b = p.shape();
  const double a = p.scale();
  return (kCovScale * a * a / (b * b) + kCovShape * b * b - 2.0 * kCovCross * a) / static_cast<double>(n);
}

BootstrapSummary summarize_replicates(std::span<const WeibullParams> estimates, std::size_t n_data,
                                      std::size_t failed) {
  if (estimates.size() < 2) throw BootstrapError("bootstrap summary needs at least 2 successful replicates");
  const double k = static_cast<double>(estimates.size());
  double mb = 0.0, ma = 0.0;
  for (const auto& e : estimates) {
    mb += e.shape();
    ma += e.scale();
  }
  mb /= k;
  ma /= k;
  double vb = 0.0, va = 0.0;
  for (const auto& e : estimates) {
    vb += (e.shape() - mb) * (e.shape() - mb);
    va += (e.scale() - ma) * (e.scale() - ma);
  }
  BootstrapSummary out;
  out.mean_estimate = WeibullParams(mb, ma);
  out.var_shape = vb / (k - 1.0);
  out.var_scale = va / (k - 1.0);
  out.total_asymptotic_variance = total_asymptotic_variance(out.mean_estimate, n_data);
  out.replicates = estimates.size();
  out.failed = failed;
  return out;
}

BootstrapSummary bootstrap(const LifetimeSample& data, ClassicalMethod method, std::size_t replicates,
                           std::uint64_t seed) {
  if (replicates < 100) throw DomainError("bootstrap: need at least 100 replicates");
  const auto t = data.times();
  const std::size_t n = t.size();
  std::vector<WeibullParams> estimates;
  estimates.reserve(replicates);
  std::vector<double> resample(n);
  std::size_t failed = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(seed, r));
    for (double& x : resample) x = t[rng.index(n)];
    try {
      estimates.push_back(fit(method, LifetimeSample(resample)));
    } catch (const EstimationError&) {
      ++failed;
    } catch (const DomainError&) {
      ++failed;
    }
  }
  if (static_cast<double>(failed) > 0.1 * static_cast<double>(replicates)) {
    throw BootstrapError("bootstrap: " + std::to_string(failed) + " of " + std::to_string(replicates) +
                         " resamples failed to fit (" + std::string(to_string(method)) + ")");
  }
  return summarize_replicates(estimates, n, failed);
}

std::string_view to_string(HazardVerdict v) noexcept {
  switch (v) {
    case HazardVerdict::IHR:
      return "IHR";
    case HazardVerdict::DHR:
      return "DHR";
    case HazardVerdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

EpsteinResult epstein_test(const LifetimeSample& data) {
  if (data.size() < 5) throw DomainError("epstein_test: need at least 5 observations");
  if (data.all_equal()) throw EstimationError("epstein_test: all times equal");
  const auto t = data.times();
  const std::size_t n = t.size();

  // Cumulative normalized spacings; tied times contribute zero-width spacings.
  std::vector<double> ttt(n);
  double prev = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += static_cast<double>(n - j) * (t[j] - prev);
    prev = t[j];
    ttt[j] = acc;
  }
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += ttt[i] / ttt[n - 1];

  const double m = static_cast<double>(n - 1);
  EpsteinResult out;
  out.statistic = (s - 0.5 * m) / std::sqrt(m / 12.0);
  out.p_value = 2.0 * normal_cdf(-std::abs(out.statistic));
  if (out.statistic > kZ95) {
    out.verdict = HazardVerdict::IHR;
  } else if (out.statistic < -kZ95) {
    out.verdict = HazardVerdict::DHR;
  }
  return out;
}

}  // namespace weibayes
