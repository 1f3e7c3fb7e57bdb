#pragma once

// Counter-based random variates. A stream is a pure function of
// (seed, replicate index): Philox4x32-10 keyed by a mix of the seed, with the
// replicate index in the upper counter words and the block number in the
// lower ones. Streams never share counters, so replicates may be generated in
// any order on any number of threads.

#include <cstdint>
#include <span>
#include <vector>

#include "orderthresh/kernels.hpp"

namespace orderthresh {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

class VariateStream {
 public:
  VariateStream(std::uint64_t seed, std::uint64_t replicate);

  /// Restart at the beginning of the stream for (seed, replicate).
  void reset(std::uint64_t seed, std::uint64_t replicate);

  /// Standard normals by Box-Muller, one Philox block per pair.
  void fill_normal(std::span<double> out);

  /// Standard exponentials by inversion, one Philox block per pair.
  void fill_exponential(std::span<double> out);

  /// Uniforms on (0, 1), one Philox block per pair.
  void fill_uniform(std::span<double> out);

  /// Next single normal; draws a fresh block every second call.
  double normal();

  std::uint64_t blocks_used() const { return next_block_; }

 private:
  void uniforms(std::size_t count);

  kernels::PhiloxKey key_{};
  std::uint64_t replicate_ = 0;
  std::uint64_t next_block_ = 0;
  std::vector<std::uint32_t> words_;
  std::vector<std::uint64_t> bits_;
  std::vector<double> unit_;
  double pending_ = 0.0;
  bool has_pending_ = false;
};

/// The normal stream for one replicate of a study.
VariateStream normal_variate_stream(std::uint64_t seed, std::uint64_t replicate_index);

}  // namespace orderthresh
