#pragma once

#include <optional>
#include <span>
#include <vector>

#include "weibayes/weibull.hpp"

namespace weibayes {

/// Differentiable log density on R^d, the sampler's view of a target.
/// Implementations must be pure: the same point always yields the same
/// value and gradient, and concurrent calls are allowed.
class LogDensity {
 public:
  virtual ~LogDensity() = default;

  virtual std::size_t dimension() const = 0;

  /// Writes the gradient into `grad` (size dimension()) and returns the log
  /// density. Returns -inf to reject a point; the gradient is then ignored.
  virtual double evaluate(std::span<const double> q, std::span<double> grad) const = 0;

  /// Starting point before per-chain jitter.
  virtual std::vector<double> initial_point() const { return std::vector<double>(dimension(), 0.0); }

  /// Weibull parameters carried by an unconstrained point, when the target has them.
  virtual std::optional<WeibullParams> weibull_params(std::span<const double> /*q*/) const { return std::nullopt; }
};

}  // namespace weibayes
