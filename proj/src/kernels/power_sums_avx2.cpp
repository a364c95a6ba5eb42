#include <cmath>

#include "weibayes/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define WEIBAYES_HAVE_X86 1
#else
#define WEIBAYES_HAVE_X86 0
#endif

namespace weibayes::kernels {

#if WEIBAYES_HAVE_X86

namespace {

#define WEIBAYES_AVX2 __attribute__((target("avx2,fma")))

// exp(x) for four lanes. Cody-Waite reduction x = n ln2 + r with |r| <= ln2/2,
// then a degree-13 Taylor polynomial (truncation error < 5e-18 relative).
// Inputs are clamped to the normal range, so x < -708.39 yields ~2.2e-308
// instead of a subnormal.
WEIBAYES_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.39);
  const __m256d hi = _mm256_set1_pd(709.0);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));

  // 2^n assembled in the exponent field; the magic constant leaves n in the low bits.
  const __m256d magic = _mm256_set1_pd(0x1.8p52);
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)), _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

WEIBAYES_AVX2 inline double hsum(__m256d v) {
  const __m128d low = _mm256_castpd256_pd128(v);
  const __m128d high = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(low, high);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

WEIBAYES_AVX2 PowerSums power_sums_avx2(std::span<const double> u, double beta) noexcept {
  const __m256d vbeta = _mm256_set1_pd(beta);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  const std::size_t n = u.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(u.data() + i);
    const __m256d w = exp_pd(_mm256_mul_pd(vbeta, x));
    const __m256d xw = _mm256_mul_pd(x, w);
    acc0 = _mm256_add_pd(acc0, w);
    acc1 = _mm256_add_pd(acc1, xw);
    acc2 = _mm256_fmadd_pd(x, xw, acc2);
  }
  if (i < n) {
    // Pad the tail with copies of a live element and mask their weight out.
    alignas(32) double buf[4];
    alignas(32) double keep[4];
    for (std::size_t k = 0; k < 4; ++k) {
      const bool live = i + k < n;
      buf[k] = live ? u[i + k] : u[i];
      keep[k] = live ? 1.0 : 0.0;
    }
    const __m256d x = _mm256_load_pd(buf);
    const __m256d w = _mm256_mul_pd(exp_pd(_mm256_mul_pd(vbeta, x)), _mm256_load_pd(keep));
    const __m256d xw = _mm256_mul_pd(x, w);
    acc0 = _mm256_add_pd(acc0, w);
    acc1 = _mm256_add_pd(acc1, xw);
    acc2 = _mm256_fmadd_pd(x, xw, acc2);
  }
  return {hsum(acc0), hsum(acc1), hsum(acc2)};
}

bool avx2_available() noexcept {
  static const bool available = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return available;
}

#else

PowerSums power_sums_avx2(std::span<const double> u, double beta) noexcept {
  return power_sums_scalar(u, beta);
}

bool avx2_available() noexcept { return false; }

#endif

}  // namespace weibayes::kernels
