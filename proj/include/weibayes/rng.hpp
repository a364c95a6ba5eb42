#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace weibayes {

/// Counter-based generator (Philox4x32-10). The output at position i of
/// stream s under seed k is a pure function of (k, s, i), so independent
/// workers can derive non-overlapping streams without coordination.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) noexcept;

  /// Child generator whose stream is derived from this stream and `tag`.
  /// Does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t tag) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  unsigned used_ = 2;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Stateless 64-bit mixer (splitmix64 finalizer); used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic seed for a labelled sub-task, e.g. (study seed, dataset, model).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace weibayes
