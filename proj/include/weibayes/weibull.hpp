#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace weibayes {

/// Two-parameter Weibull model: shape beta (dimensionless) and scale alpha
/// (time units). Both strictly positive and finite.
class WeibullParams {
 public:
  WeibullParams(double shape, double scale);

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;

 private:
  double shape_;
  double scale_;
};

enum class HazardTag { IHR, DHR, Unknown };

std::string_view to_string(HazardTag tag) noexcept;

/// Ordered positive failure times. The constructor sorts and validates; the
/// shifted log-times used by the likelihood kernels are cached alongside.
class LifetimeSample {
 public:
  explicit LifetimeSample(std::vector<double> times, std::string label = {},
                          HazardTag tag = HazardTag::Unknown);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  const std::string& label() const noexcept { return label_; }
  HazardTag hazard_tag() const noexcept { return tag_; }

  /// log t_i - log t_max, all <= 0.
  std::span<const double> shifted_log_times() const noexcept { return shifted_log_; }
  double log_max() const noexcept { return log_max_; }
  double sum_log() const noexcept { return sum_log_; }

  double mean() const noexcept;
  /// Unbiased (n - 1) sample variance.
  double variance() const noexcept;
  bool all_equal() const noexcept { return times_.front() == times_.back(); }

  /// New sample with every time multiplied by c > 0.
  LifetimeSample scaled(double c) const;

 private:
  std::vector<double> times_;
  std::vector<double> shifted_log_;
  std::string label_;
  HazardTag tag_;
  double log_max_ = 0.0;
  double sum_log_ = 0.0;
};

double cdf(double t, const WeibullParams& p);
double survival(double t, const WeibullParams& p);
double pdf(double t, const WeibullParams& p);
double log_pdf(double t, const WeibullParams& p);
double hazard(double t, const WeibullParams& p);
double quantile(double u, const WeibullParams& p);

double weibull_mean(const WeibullParams& p) noexcept;
double weibull_variance(const WeibullParams& p) noexcept;

double log_likelihood(const LifetimeSample& data, const WeibullParams& p);

/// Log-likelihood and its partial derivatives in (shape, scale). Takes raw
/// doubles so samplers can probe extreme states; the value is -inf (not an
/// exception) when the sum of (t/scale)^shape overflows.
struct LikelihoodTerms {
  double value = 0.0;
  double d_shape = 0.0;
  double d_scale = 0.0;
};
LikelihoodTerms log_likelihood_terms(const LifetimeSample& data, double shape, double scale) noexcept;

/// n inverse-CDF draws from a counter-based stream keyed by `seed`.
LifetimeSample sample(const WeibullParams& p, std::size_t n, std::uint64_t seed,
                      std::string label = {}, HazardTag tag = HazardTag::Unknown);

/// Expected remaining life given survival to x:
///   (scale/shape) exp(s) Gamma(1/shape, s),  s = (x/scale)^shape,
/// evaluated in log space so large s does not overflow.
double mean_residual_life(double x, const WeibullParams& p);

}  // namespace weibayes
