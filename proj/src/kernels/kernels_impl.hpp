#pragma once

#include "lbotdr/kernels.hpp"

namespace lbotdr::kernels::impl {

#if defined(LBOTDR_HAVE_AVX2)
const KernelSet& avx2();
#endif
#if defined(LBOTDR_HAVE_AVX512)
const KernelSet& avx512();
#endif
#if defined(LBOTDR_HAVE_NEON)
const KernelSet& neon();
#endif

}  // namespace lbotdr::kernels::impl
