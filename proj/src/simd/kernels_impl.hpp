#pragma once

#include "seqquant/simd/kernels.hpp"

namespace seqquant::simd::detail {

extern const KernelTable kScalarTable;
#if defined(SEQQUANT_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(SEQQUANT_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace seqquant::simd::detail
