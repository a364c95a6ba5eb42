#include "weibayes/weibull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "weibayes/error.hpp"
#include "weibayes/kernels.hpp"
#include "weibayes/rng.hpp"
#include "weibayes/special.hpp"

namespace weibayes {
namespace {

void require_finite(double t, const char* what) {
  if (!std::isfinite(t)) throw DomainError(std::string(what) + ": argument must be finite");
}

void require_positive(double t, const char* what) {
  require_finite(t, what);
  if (!(t > 0.0)) throw DomainError(std::string(what) + ": argument must be positive");
}

}  // namespace

WeibullParams::WeibullParams(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!std::isfinite(shape) || !(shape > 0.0)) throw DomainError("Weibull shape must be positive and finite");
  if (!std::isfinite(scale) || !(scale > 0.0)) throw DomainError("Weibull scale must be positive and finite");
}

std::string_view to_string(HazardTag tag) noexcept {
  switch (tag) {
    case HazardTag::IHR:
      return "IHR";
    case HazardTag::DHR:
      return "DHR";
    case HazardTag::Unknown:
      break;
  }
  return "unknown";
}

LifetimeSample::LifetimeSample(std::vector<double> times, std::string label, HazardTag tag)
    : times_(std::move(times)), label_(std::move(label)), tag_(tag) {
  if (times_.empty()) throw DomainError("lifetime sample must not be empty");
  for (const double t : times_) {
    if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("lifetime sample times must be positive and finite");
  }
  std::sort(times_.begin(), times_.end());
  log_max_ = std::log(times_.back());
  shifted_log_.reserve(times_.size());
  for (const double t : times_) {
    const double lt = std::log(t);
    sum_log_ += lt;
    shifted_log_.push_back(lt - log_max_);
  }
}

double LifetimeSample::mean() const noexcept {
  return std::accumulate(times_.begin(), times_.end(), 0.0) / static_cast<double>(times_.size());
}

double LifetimeSample::variance() const noexcept {
  if (times_.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (const double t : times_) ss += (t - m) * (t - m);
  return ss / static_cast<double>(times_.size() - 1);
}

LifetimeSample LifetimeSample::scaled(double c) const {
  require_positive(c, "LifetimeSample::scaled");
  std::vector<double> out(times_);
  for (double& t : out) t *= c;
  return LifetimeSample(std::move(out), label_, tag_);
}

double cdf(double t, const WeibullParams& p) {
  require_finite(t, "cdf");
  if (t <= 0.0) return 0.0;
  return -std::expm1(-std::pow(t / p.scale(), p.shape()));
}

double survival(double t, const WeibullParams& p) {
  require_finite(t, "survival");
  if (t <= 0.0) return 1.0;
  return std::exp(-std::pow(t / p.scale(), p.shape()));
}

double log_pdf(double t, const WeibullParams& p) {
  require_positive(t, "log_pdf");
  const double b = p.shape();
  const double z = std::log(t) - std::log(p.scale());
  return std::log(b) - std::log(p.scale()) + (b - 1.0) * z - std::exp(b * z);
}

double pdf(double t, const WeibullParams& p) { return std::exp(log_pdf(t, p)); }

double hazard(double t, const WeibullParams& p) {
  require_positive(t, "hazard");
  const double b = p.shape();
  return (b / p.scale()) * std::pow(t / p.scale(), b - 1.0);
}

double quantile(double u, const WeibullParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: probability must lie in (0, 1)");
  return p.scale() * std::pow(-std::log1p(-u), 1.0 / p.shape());
}

double weibull_mean(const WeibullParams& p) noexcept {
  return p.scale() * std::exp(std::lgamma(1.0 + 1.0 / p.shape()));
}

double weibull_variance(const WeibullParams& p) noexcept {
  const double b = p.shape();
  const double g1 = std::exp(std::lgamma(1.0 + 1.0 / b));
  const double g2 = std::exp(std::lgamma(1.0 + 2.0 / b));
  return p.scale() * p.scale() * (g2 - g1 * g1);
}

LikelihoodTerms log_likelihood_terms(const LifetimeSample& data, double shape, double scale) noexcept {
  const double n = static_cast<double>(data.size());
  const double log_scale = std::log(scale);
  const double offset = data.log_max() - log_scale;
  const kernels::PowerSums s = kernels::power_sums(data.shifted_log_times(), shape);
  // sum (t/scale)^shape = exp(shape * offset) * s0, with s0 >= 1.
  const double scale_factor = std::exp(shape * offset);
  const double total = scale_factor * s.s0;
  const double total_log = scale_factor * (s.s1 + offset * s.s0);
  LikelihoodTerms out;
  out.value = n * std::log(shape) - n * shape * log_scale + (shape - 1.0) * data.sum_log() - total;
  out.d_shape = n / shape - n * log_scale + data.sum_log() - total_log;
  out.d_scale = (shape / scale) * (total - n);
  if (!std::isfinite(out.value)) out.value = -std::numeric_limits<double>::infinity();
  return out;
}

double log_likelihood(const LifetimeSample& data, const WeibullParams& p) {
  return log_likelihood_terms(data, p.shape(), p.scale()).value;
}

LifetimeSample sample(const WeibullParams& p, std::size_t n, std::uint64_t seed, std::string label,
                      HazardTag tag) {
  if (n == 0) throw DomainError("sample: n must be at least 1");
  Rng rng(seed);
  std::vector<double> times(n);
  for (double& t : times) t = quantile(rng.uniform(), p);
  return LifetimeSample(std::move(times), std::move(label), tag);
}

double mean_residual_life(double x, const WeibullParams& p) {
  require_finite(x, "mean_residual_life");
  if (x < 0.0) throw DomainError("mean_residual_life: x must be nonnegative");
  const double b = p.shape();
  const double s = std::pow(x / p.scale(), b);
  return std::exp(std::log(p.scale() / b) + log_scaled_upper_incomplete_gamma(1.0 / b, s));
}

}  // namespace weibayes
