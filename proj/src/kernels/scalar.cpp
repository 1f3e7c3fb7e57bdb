#include "kernels_internal.hpp"

#include "philox_constants.hpp"

namespace orderthresh::kernels::detail {
namespace {

void philox_scalar(PhiloxKey key, std::uint64_t stream, std::uint64_t first, std::size_t nblocks,
                   std::uint32_t* out) {
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::uint64_t block = first + b;
    std::uint32_t c0 = static_cast<std::uint32_t>(block);
    std::uint32_t c1 = static_cast<std::uint32_t>(block >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t k0 = key.lo;
    std::uint32_t k1 = key.hi;
    for (int round = 0; round < kPhiloxRounds; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    out[4 * b + 0] = c0;
    out[4 * b + 1] = c1;
    out[4 * b + 2] = c2;
    out[4 * b + 3] = c3;
  }
}

void square_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

std::size_t count_above_scalar(const double* y, std::size_t n, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += y[i] > threshold ? 1 : 0;
  return count;
}

std::size_t compact_above_scalar(const double* y, std::size_t n, double threshold, double* out) {
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] > threshold) out[m++] = y[i];
  }
  return m;
}

void bits_to_unit_scalar(const std::uint64_t* bits, double* out, std::size_t n) {
  constexpr double kScale = 0x1.0p-52;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (static_cast<double>(bits[i] >> 12) + 0.5) * kScale;
  }
}

}  // namespace

const KernelSet kScalarKernels{Isa::kScalar,        philox_scalar,        square_scalar, add_scalar,
                               count_above_scalar, compact_above_scalar, bits_to_unit_scalar};

}  // namespace orderthresh::kernels::detail
