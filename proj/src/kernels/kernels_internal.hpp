#pragma once

#include "orderthresh/kernels.hpp"

namespace orderthresh::kernels::detail {

extern const KernelSet kScalarKernels;

#if defined(ORDERTHRESH_HAVE_AVX2)
extern const KernelSet kAvx2Kernels;
#endif

}  // namespace orderthresh::kernels::detail
