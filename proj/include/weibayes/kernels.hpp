#pragma once

#include <span>
#include <string_view>

namespace weibayes::kernels {

/// Exponentially weighted moments of a vector u at rate beta:
///   s0 = sum exp(beta u), s1 = sum u exp(beta u), s2 = sum u^2 exp(beta u).
/// Every Weibull likelihood, score and profile-score evaluation reduces to
/// these three sums over the (shifted) log failure times.
struct PowerSums {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

enum class Isa { Scalar, Avx2 };

/// Reference implementation; one std::exp per element, left-to-right sums.
PowerSums power_sums_scalar(std::span<const double> u, double beta) noexcept;

/// Four-lane AVX2/FMA implementation with a polynomial exp. Callers must
/// check avx2_available() first.
PowerSums power_sums_avx2(std::span<const double> u, double beta) noexcept;

bool avx2_available() noexcept;

/// Variant picked on first use: AVX2 when the CPU supports it, unless the
/// WEIBAYES_KERNEL environment variable is set to "scalar".
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Dispatching entry point.
PowerSums power_sums(std::span<const double> u, double beta) noexcept;

}  // namespace weibayes::kernels
