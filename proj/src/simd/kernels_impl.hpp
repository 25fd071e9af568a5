#pragma once

#include "rfcvnn/simd/kernels.hpp"

namespace rfcvnn::simd::detail {

const KernelTable& scalar_table();
#if defined(RFCVNN_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(RFCVNN_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace rfcvnn::simd::detail
