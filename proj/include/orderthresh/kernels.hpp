#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// ISA-specific variants chosen at runtime.
//
// Every kernel here is order-free (elementwise or exact integer/bit results),
// so all variants produce bit-identical output. Statistics built on top of
// them therefore do not depend on which variant the host selects.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace orderthresh::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

struct PhiloxKey {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
};

/// Function table for one instruction set.
struct KernelSet {
  Isa isa;
  // Philox4x32-10 on counters (first + b, stream) for b in [0, nblocks);
  // writes 4 words per block to out.
  void (*philox)(PhiloxKey key, std::uint64_t stream, std::uint64_t first, std::size_t nblocks,
                 std::uint32_t* out);
  // y[i] = x[i] * x[i]
  void (*square)(const double* x, double* y, std::size_t n);
  // out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // number of y[i] > threshold
  std::size_t (*count_above)(const double* y, std::size_t n, double threshold);
  // copies the y[i] > threshold to out in input order; returns the count
  std::size_t (*compact_above)(const double* y, std::size_t n, double threshold, double* out);
  // out[i] = ((bits[i] >> 12) + 0.5) * 2^-52, a uniform in (0, 1)
  void (*bits_to_unit)(const std::uint64_t* bits, double* out, std::size_t n);
};

const KernelSet& scalar_kernels();

/// The AVX2 table, or nullptr when the binary or the host lacks AVX2.
const KernelSet* avx2_kernels();

/// The table in use: the best available ISA, unless the environment variable
/// ORDER_THRESH_KERNEL=scalar forces the reference path. Chosen once.
const KernelSet& active();

// Span conveniences over active().

void square(std::span<const double> x, std::span<double> y);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
std::size_t count_above(std::span<const double> y, double threshold);

}  // namespace orderthresh::kernels
