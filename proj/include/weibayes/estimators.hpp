#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "weibayes/weibull.hpp"

namespace weibayes {

enum class ClassicalMethod { MLE, Moments, OLSRegression };

std::string_view to_string(ClassicalMethod m) noexcept;

/// 2x2 matrix in (shape, scale) coordinate order: index 0 is beta, index 1 is alpha.
struct Matrix2 {
  std::array<std::array<double, 2>, 2> m{};

  double operator()(int r, int c) const { return m[r][c]; }
  Matrix2 operator*(const Matrix2& o) const;
  Matrix2 inverse() const;
  double determinant() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

struct FisherInfo {
  Matrix2 matrix;
  std::size_t n = 0;
};

/// Classical summary of B bootstrap refits: componentwise mean and variance,
/// plus the total asymptotic variance evaluated at the mean estimate.
struct BootstrapSummary {
  WeibullParams mean_estimate{1.0, 1.0};
  double var_shape = 0.0;
  double var_scale = 0.0;
  double total_asymptotic_variance = 0.0;
  std::size_t replicates = 0;
  std::size_t failed = 0;

  double sampling_variance_total() const noexcept { return var_shape + var_scale; }
  /// Set when total_asymptotic_variance came out negative (possible for
  /// mid-range scales with the rounded covariance constants).
  bool variance_warning() const noexcept { return total_asymptotic_variance < 0.0; }
};

/// Profile-likelihood MLE: safeguarded Newton on the shape score with a
/// bisection fallback inside [0.01, 100], then the closed-form scale.
WeibullParams fit_mle(const LifetimeSample& data);

/// Coefficient-of-variation moment match, solved for shape by bisection.
WeibullParams fit_moments(const LifetimeSample& data);

/// Median-rank regression of ln(-ln(1-F)) on ln t with Bernard positions
/// (i - 0.3)/(n + 0.4); tied times share the average position of their block.
WeibullParams fit_ols(const LifetimeSample& data);

WeibullParams fit(ClassicalMethod method, const LifetimeSample& data);

/// Expected information for n observations, (shape, scale) order.
FisherInfo fisher_information(const WeibullParams& p, std::size_t n);

/// Inverse-information covariance with the rounded constants
/// 0.6079, 0.2570 and 1.1087, (shape, scale) order.
Matrix2 asymptotic_covariance(const WeibullParams& p, std::size_t n);

/// (1/n)(1.1087 a^2/b^2 + 0.6079 b^2 - 2 * 0.2570 a). Not clamped; can be negative.
double total_asymptotic_variance(const WeibullParams& p, std::size_t n);

/// Resample with replacement B times, refit, and summarize. Resamples whose
/// fit fails are dropped and counted; more than 10% failures is an error.
BootstrapSummary bootstrap(const LifetimeSample& data, ClassicalMethod method, std::size_t replicates,
                           std::uint64_t seed);

/// Summary step on an existing replicate set (order-insensitive).
BootstrapSummary summarize_replicates(std::span<const WeibullParams> estimates, std::size_t n_data,
                                      std::size_t failed = 0);

enum class HazardVerdict { IHR, DHR, Inconclusive };
std::string_view to_string(HazardVerdict v) noexcept;

struct EpsteinResult {
  double statistic = 0.0;  // standardized Z
  double p_value = 1.0;    // two-sided
  HazardVerdict verdict = HazardVerdict::Inconclusive;
};

/// Total-time-on-test test of constant hazard against monotone alternatives,
/// one-sided at the 5% level in each direction.
EpsteinResult epstein_test(const LifetimeSample& data);

}  // namespace weibayes
