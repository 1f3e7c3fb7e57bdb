#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"
#include "orderthresh/errors.hpp"

namespace orderthresh::kernels {
namespace {

bool host_has_avx2() {
#if defined(ORDERTHRESH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelSet& select() {
  const char* forced = std::getenv("ORDER_THRESH_KERNEL");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
  if (const KernelSet* k = avx2_kernels()) return *k;
  return scalar_kernels();
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

const KernelSet& scalar_kernels() { return detail::kScalarKernels; }

const KernelSet* avx2_kernels() {
#if defined(ORDERTHRESH_HAVE_AVX2)
  static const bool available = host_has_avx2();
  return available ? &detail::kAvx2Kernels : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active() {
  static const KernelSet& chosen = select();
  return chosen;
}

void square(std::span<const double> x, std::span<double> y) {
  orderthresh::detail::require(y.size() >= x.size(), "kernels::square: output too small");
  active().square(x.data(), y.data(), x.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  orderthresh::detail::require(b.size() == a.size() && out.size() >= a.size(), "kernels::add: size mismatch");
  active().add(a.data(), b.data(), out.data(), a.size());
}

std::size_t count_above(std::span<const double> y, double threshold) {
  return active().count_above(y.data(), y.size(), threshold);
}

}  // namespace orderthresh::kernels
