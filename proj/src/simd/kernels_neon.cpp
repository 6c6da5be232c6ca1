// NEON (2 x double) kernels for aarch64. Same expression tree as the scalar
// reference; the build disables FP contraction so vmul/vadd are not fused.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace seqquant::simd::detail {

namespace {

constexpr std::size_t kLanes = 2;

inline double min2(double a, double b) { return b < a ? b : a; }

inline float64x2_t vmin2(float64x2_t a, float64x2_t b) { return vbslq_f64(vcltq_f64(b, a), b, a); }

inline float64x2_t blend(const double* src, float64x2_t w0, float64x2_t w1) {
  return vaddq_f64(vmulq_f64(w0, vld1q_f64(src)), vmulq_f64(w1, vld1q_f64(src + 1)));
}

void shifted(double* dst, const double* src, double w0, double w1, std::size_t n) {
  const float64x2_t vw0 = vdupq_n_f64(w0);
  const float64x2_t vw1 = vdupq_n_f64(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(dst + i, blend(src + i, vw0, vw1));
  for (; i < n; ++i) dst[i] = w0 * src[i] + w1 * src[i + 1];
}

void accumulate_shifted(double* acc, const double* src, double w0, double w1, std::size_t n) {
  const float64x2_t vw0 = vdupq_n_f64(w0);
  const float64x2_t vw1 = vdupq_n_f64(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    vst1q_f64(acc + i, vaddq_f64(blend(src + i, vw0, vw1), vld1q_f64(acc + i)));
  for (; i < n; ++i) acc[i] = (w0 * src[i] + w1 * src[i + 1]) + acc[i];
}

void relax_shifted(double* dst, const double* base, const double* src, double w0, double w1, std::size_t n) {
  const float64x2_t vw0 = vdupq_n_f64(w0);
  const float64x2_t vw1 = vdupq_n_f64(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t cand = vaddq_f64(blend(src + i, vw0, vw1), vld1q_f64(base + i));
    vst1q_f64(dst + i, vmin2(vld1q_f64(dst + i), cand));
  }
  for (; i < n; ++i) dst[i] = min2(dst[i], (w0 * src[i] + w1 * src[i + 1]) + base[i]);
}

void relax_sum(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    vst1q_f64(dst + i, vmin2(vld1q_f64(dst + i), vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
  for (; i < n; ++i) dst[i] = min2(dst[i], a[i] + b[i]);
}

void relax(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(dst + i, vmin2(vld1q_f64(dst + i), vld1q_f64(src + i)));
  for (; i < n; ++i) dst[i] = min2(dst[i], src[i]);
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
  const float64x2_t h1 = vdupq_n_f64(stop_h1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t go = vaddq_f64(vld1q_f64(run + i), vld1q_f64(cont + i));
    vst1q_f64(out + i, vmin2(h1, vmin2(vld1q_f64(stop_h0 + i), go)));
  }
  for (; i < n; ++i) out[i] = min2(stop_h1, min2(stop_h0[i], run[i] + cont[i]));
}

}  // namespace

const KernelTable kNeonTable{Backend::Neon, shifted,   accumulate_shifted, relax_shifted,
                             relax_sum,     relax,     relax_argmin,       bellman};

}  // namespace seqquant::simd::detail
