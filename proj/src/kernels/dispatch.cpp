#include <cstdlib>
#include <string_view>

#include "weibayes/kernels.hpp"

namespace weibayes::kernels {
namespace {

Isa select_isa() noexcept {
  if (const char* env = std::getenv("WEIBAYES_KERNEL")) {
    if (std::string_view(env) == "scalar") return Isa::Scalar;
  }
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

Isa active_isa() noexcept {
  static const Isa isa = select_isa();
  return isa;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

PowerSums power_sums(std::span<const double> u, double beta) noexcept {
  if (active_isa() == Isa::Avx2) return power_sums_avx2(u, beta);
  return power_sums_scalar(u, beta);
}

}  // namespace weibayes::kernels
