#include <cmath>

#include "weibayes/kernels.hpp"

namespace weibayes::kernels {

PowerSums power_sums_scalar(std::span<const double> u, double beta) noexcept {
  PowerSums out;
  for (const double x : u) {
    const double w = std::exp(beta * x);
    out.s0 += w;
    out.s1 += x * w;
    out.s2 += x * x * w;
  }
  return out;
}

}  // namespace weibayes::kernels
