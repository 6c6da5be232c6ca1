// AVX2 (4 x double) kernels. Compiled with -mavx2 only; multiply and add stay
// separate so every lane rounds exactly like the scalar reference. Tails fall
// through to the scalar loop body.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace seqquant::simd::detail {

namespace {

constexpr std::size_t kLanes = 4;

inline double min2(double a, double b) { return b < a ? b : a; }

// _mm256_min_pd(x, y) returns x < y ? x : y, so min2(a, b) is min_pd(b, a).
inline __m256d vmin2(__m256d a, __m256d b) { return _mm256_min_pd(b, a); }

inline __m256d blend(const double* src, __m256d w0, __m256d w1) {
  return _mm256_add_pd(_mm256_mul_pd(w0, _mm256_loadu_pd(src)), _mm256_mul_pd(w1, _mm256_loadu_pd(src + 1)));
}

void shifted(double* dst, const double* src, double w0, double w1, std::size_t n) {
  const __m256d vw0 = _mm256_set1_pd(w0);
  const __m256d vw1 = _mm256_set1_pd(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(dst + i, blend(src + i, vw0, vw1));
  for (; i < n; ++i) dst[i] = w0 * src[i] + w1 * src[i + 1];
}

void accumulate_shifted(double* acc, const double* src, double w0, double w1, std::size_t n) {
  const __m256d vw0 = _mm256_set1_pd(w0);
  const __m256d vw1 = _mm256_set1_pd(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(acc + i, _mm256_add_pd(blend(src + i, vw0, vw1), _mm256_loadu_pd(acc + i)));
  for (; i < n; ++i) acc[i] = (w0 * src[i] + w1 * src[i + 1]) + acc[i];
}

void relax_shifted(double* dst, const double* base, const double* src, double w0, double w1, std::size_t n) {
  const __m256d vw0 = _mm256_set1_pd(w0);
  const __m256d vw1 = _mm256_set1_pd(w1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d cand = _mm256_add_pd(blend(src + i, vw0, vw1), _mm256_loadu_pd(base + i));
    _mm256_storeu_pd(dst + i, vmin2(_mm256_loadu_pd(dst + i), cand));
  }
  for (; i < n; ++i) dst[i] = min2(dst[i], (w0 * src[i] + w1 * src[i + 1]) + base[i]);
}

void relax_sum(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d cand = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(dst + i, vmin2(_mm256_loadu_pd(dst + i), cand));
  }
  for (; i < n; ++i) dst[i] = min2(dst[i], a[i] + b[i]);
}

void relax(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(dst + i, vmin2(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i)));
  for (; i < n; ++i) dst[i] = min2(dst[i], src[i]);
}

void relax_argmin(double* best, std::int32_t* arg, const double* cand, std::int32_t id, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d c = _mm256_loadu_pd(cand + i);
    const __m256d b = _mm256_loadu_pd(best + i);
    const __m256d lt = _mm256_cmp_pd(c, b, _CMP_LT_OQ);
    const int mask = _mm256_movemask_pd(lt);
    if (mask == 0) continue;
    _mm256_storeu_pd(best + i, _mm256_blendv_pd(b, c, lt));
    for (std::size_t l = 0; l < kLanes; ++l)
      if (mask & (1 << l)) arg[i + l] = id;
  }
  for (; i < n; ++i) {
    if (cand[i] < best[i]) {
      best[i] = cand[i];
      arg[i] = id;
    }
  }
}

void bellman(double* out, const double* run, const double* cont, const double* stop_h0, double stop_h1,
             std::size_t n) {
  const __m256d h1 = _mm256_set1_pd(stop_h1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d go = _mm256_add_pd(_mm256_loadu_pd(run + i), _mm256_loadu_pd(cont + i));
    _mm256_storeu_pd(out + i, vmin2(h1, vmin2(_mm256_loadu_pd(stop_h0 + i), go)));
  }
  for (; i < n; ++i) out[i] = min2(stop_h1, min2(stop_h0[i], run[i] + cont[i]));
}

}  // namespace

const KernelTable kAvx2Table{Backend::Avx2, shifted,   accumulate_shifted, relax_shifted,
                             relax_sum,     relax,     relax_argmin,       bellman};

}  // namespace seqquant::simd::detail
