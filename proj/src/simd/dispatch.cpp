#include <atomic>

#include "kernels_impl.hpp"
#include "seqquant/errors.hpp"

namespace seqquant::simd {

namespace {

Backend best_backend() {
#if defined(SEQQUANT_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
#if defined(SEQQUANT_HAVE_NEON)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> backend{best_backend()};
  return backend;
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

bool supported(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(SEQQUANT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(SEQQUANT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Backend backend) {
  if (!supported(backend)) throw InvalidArgument("SIMD backend " + to_string(backend) + " is not available");
  switch (backend) {
#if defined(SEQQUANT_HAVE_AVX2)
    case Backend::Avx2:
      return detail::kAvx2Table;
#endif
#if defined(SEQQUANT_HAVE_NEON)
    case Backend::Neon:
      return detail::kNeonTable;
#endif
    default:
      return detail::kScalarTable;
  }
}

const KernelTable& active_kernels() { return kernels_for(active().load()); }
Backend active_backend() { return active().load(); }

void set_active_backend(Backend backend) {
  kernels_for(backend);  // validates
  active().store(backend);
}

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(const std::string& text) {
  if (text == "scalar") return Backend::Scalar;
  if (text == "avx2") return Backend::Avx2;
  if (text == "neon") return Backend::Neon;
  if (text == "auto") return best_backend();
  throw InvalidArgument("unknown SIMD backend '" + text + "'");
}

}  // namespace seqquant::simd
