// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>

#include "kernels_internal.hpp"
#include "philox_constants.hpp"

namespace orderthresh::kernels::detail {
namespace {

// Four Philox blocks per iteration, one per 64-bit lane with the 32-bit
// words held in the low half of each lane.
void philox_avx2(PhiloxKey key, std::uint64_t stream, std::uint64_t first, std::size_t nblocks,
                 std::uint32_t* out) {
  const __m256i mask32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i m0 = _mm256_set1_epi64x(kPhiloxM0);
  const __m256i m1 = _mm256_set1_epi64x(kPhiloxM1);
  const __m256i w0 = _mm256_set1_epi64x(kPhiloxW0);
  const __m256i w1 = _mm256_set1_epi64x(kPhiloxW1);
  const __m256i lane_offset = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256i s_lo = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream));
  const __m256i s_hi = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream >> 32));

  std::size_t b = 0;
  alignas(32) std::uint64_t lanes[4][4];
  for (; b + 4 <= nblocks; b += 4) {
    const __m256i block = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first + b)),
                                           lane_offset);
    __m256i c0 = _mm256_and_si256(block, mask32);
    __m256i c1 = _mm256_srli_epi64(block, 32);
    __m256i c2 = s_lo;
    __m256i c3 = s_hi;
    __m256i k0 = _mm256_set1_epi64x(key.lo);
    __m256i k1 = _mm256_set1_epi64x(key.hi);
    for (int round = 0; round < kPhiloxRounds; ++round) {
      const __m256i p0 = _mm256_mul_epu32(c0, m0);
      const __m256i p1 = _mm256_mul_epu32(c2, m1);
      const __m256i hi0 = _mm256_srli_epi64(p0, 32);
      const __m256i lo0 = _mm256_and_si256(p0, mask32);
      const __m256i hi1 = _mm256_srli_epi64(p1, 32);
      const __m256i lo1 = _mm256_and_si256(p1, mask32);
      c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
      c1 = lo1;
      c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
      c3 = lo0;
      k0 = _mm256_and_si256(_mm256_add_epi64(k0, w0), mask32);
      k1 = _mm256_and_si256(_mm256_add_epi64(k1, w1), mask32);
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[0]), c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[1]), c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[2]), c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[3]), c3);
    for (int lane = 0; lane < 4; ++lane) {
      for (int w = 0; w < 4; ++w) {
        out[4 * (b + lane) + w] = static_cast<std::uint32_t>(lanes[w][lane]);
      }
    }
  }
  if (b < nblocks) kScalarKernels.philox(key, stream, first + b, nblocks - b, out + 4 * b);
}

void square_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_mul_pd(v, v));
  }
  for (; i < n; ++i) y[i] = x[i] * x[i];
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

std::size_t count_above_avx2(const double* y, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(y + i), t, _CMP_GT_OQ));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += y[i] > threshold ? 1 : 0;
  return count;
}

std::size_t compact_above_avx2(const double* y, std::size_t n, double threshold, double* out) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t m = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    unsigned mask = static_cast<unsigned>(
        _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(y + i), t, _CMP_GT_OQ)));
    while (mask != 0) {
      out[m++] = y[i + static_cast<std::size_t>(std::countr_zero(mask))];
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i) {
    if (y[i] > threshold) out[m++] = y[i];
  }
  return m;
}

void bits_to_unit_avx2(const std::uint64_t* bits, double* out, std::size_t n) {
  // For x < 2^52, the double with bit pattern (x | bits(2^52)) equals 2^52 + x.
  const __m256i exponent = _mm256_set1_epi64x(0x4330000000000000ll);
  const __m256d two52 = _mm256_set1_pd(0x1.0p52);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d scale = _mm256_set1_pd(0x1.0p-52);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i x = _mm256_srli_epi64(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(bits + i)), 12);
    const __m256d d = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(x, exponent)), two52);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_add_pd(d, half), scale));
  }
  if (i < n) kScalarKernels.bits_to_unit(bits + i, out + i, n - i);
}

}  // namespace

const KernelSet kAvx2Kernels{Isa::kAvx2,       philox_avx2,        square_avx2,      add_avx2,
                             count_above_avx2, compact_above_avx2, bits_to_unit_avx2};

}  // namespace orderthresh::kernels::detail
