#include "kernels_impl.hpp"

namespace seqquant::simd::detail {

namespace {

inline double min2(double a, double b) { return b < a ? b : a; }

void shifted(double* dst, const double* src, double w0, double w1, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = w0 * src[i] + w1 * src[i + 1];
}

void accumulate_shifted(double* acc, const double* src, double w0, double w1, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = (w0 * src[i] + w1 * src[i + 1]) + acc[i];
}

void relax_shifted(double* dst, const double* base, const double* src, double w0, double w1, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = min2(dst[i], (w0 * src[i] + w1 * src[i + 1]) + base[i]);
}

void relax_sum(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = min2(dst[i], a[i] + b[i]);
}

void relax(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = min2(dst[i], src[i]);
}

void relax_argmin(double* best, std::int32_t* arg, const double* cand, std::int32_t id, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (cand[i] < best[i]) {
      best[i] = cand[i];
      arg[i] = id;
    }
  }
}

void bellman(double* out, const double* run, const double* cont, const double* stop_h0, double stop_h1,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = min2(stop_h1, min2(stop_h0[i], run[i] + cont[i]));
}

}  // namespace

const KernelTable kScalarTable{Backend::Scalar, shifted,   accumulate_shifted, relax_shifted,
                               relax_sum,       relax,     relax_argmin,       bellman};

}  // namespace seqquant::simd::detail
