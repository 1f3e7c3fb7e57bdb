#include "orderthresh/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace orderthresh {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

VariateStream::VariateStream(std::uint64_t seed, std::uint64_t replicate) { reset(seed, replicate); }

void VariateStream::reset(std::uint64_t seed, std::uint64_t replicate) {
  const std::uint64_t k = mix64(seed);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  replicate_ = replicate;
  next_block_ = 0;
  has_pending_ = false;
}

// Fills unit_ with 2 * ceil(count / 2) uniforms from fresh blocks.
void VariateStream::uniforms(std::size_t count) {
  const std::size_t blocks = (count + 1) / 2;
  words_.resize(4 * blocks);
  unit_.resize(2 * blocks);
  const auto& k = kernels::active();
  k.philox(key_, replicate_, next_block_, blocks, words_.data());
  next_block_ += blocks;
  // Each block's four words read as two little-endian 64-bit integers.
  static_assert(sizeof(std::uint64_t) == 2 * sizeof(std::uint32_t));
  bits_.resize(2 * blocks);
  for (std::size_t i = 0; i < 2 * blocks; ++i) {
    bits_[i] = static_cast<std::uint64_t>(words_[2 * i]) |
              (static_cast<std::uint64_t>(words_[2 * i + 1]) << 32);
  }
  k.bits_to_unit(bits_.data(), unit_.data(), bits_.size());
}

void VariateStream::fill_normal(std::span<double> out) {
  uniforms(out.size());
  const std::size_t pairs = out.size() / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double r = std::sqrt(-2.0 * std::log(unit_[2 * p]));
    const double theta = 2.0 * std::numbers::pi * unit_[2 * p + 1];
    out[2 * p] = r * std::cos(theta);
    out[2 * p + 1] = r * std::sin(theta);
  }
  if (out.size() % 2 != 0) {
    const double r = std::sqrt(-2.0 * std::log(unit_[2 * pairs]));
    out[2 * pairs] = r * std::cos(2.0 * std::numbers::pi * unit_[2 * pairs + 1]);
  }
}

void VariateStream::fill_exponential(std::span<double> out) {
  uniforms(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -std::log(unit_[i]);
}

void VariateStream::fill_uniform(std::span<double> out) {
  uniforms(out.size());
  std::memcpy(out.data(), unit_.data(), out.size() * sizeof(double));
}

double VariateStream::normal() {
  if (has_pending_) {
    has_pending_ = false;
    return pending_;
  }
  double pair[2];
  fill_normal(pair);
  pending_ = pair[1];
  has_pending_ = true;
  return pair[0];
}

VariateStream normal_variate_stream(std::uint64_t seed, std::uint64_t replicate_index) {
  return VariateStream(seed, replicate_index);
}

}  // namespace orderthresh
