#pragma once

// Data-parallel inner loops of the Bellman scan.
//
// Every kernel works on contiguous runs of the log-z grid. "Shifted" kernels
// read a padded value table at a fixed integer offset and blend two adjacent
// entries, which is linear interpolation at a constant log-likelihood shift.
// All backends evaluate the same expression tree without fused multiply-add,
// so results are bit-identical across backends.

#include <cstddef>
#include <cstdint>
#include <string>

namespace seqquant::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;

  /// dst[i] = w0*src[i] + w1*src[i+1]
  void (*shifted)(double* dst, const double* src, double w0, double w1, std::size_t n);
  /// acc[i] = (w0*src[i] + w1*src[i+1]) + acc[i]
  void (*accumulate_shifted)(double* acc, const double* src, double w0, double w1, std::size_t n);
  /// dst[i] = min(dst[i], (w0*src[i] + w1*src[i+1]) + base[i])
  void (*relax_shifted)(double* dst, const double* base, const double* src, double w0, double w1,
                        std::size_t n);
  /// dst[i] = min(dst[i], a[i] + b[i])
  void (*relax_sum)(double* dst, const double* a, const double* b, std::size_t n);
  /// dst[i] = min(dst[i], src[i])
  void (*relax)(double* dst, const double* src, std::size_t n);
  /// where cand[i] < best[i]: best[i] = cand[i], arg[i] = id
  void (*relax_argmin)(double* best, std::int32_t* arg, const double* cand, std::int32_t id, std::size_t n);
  /// out[i] = min(stop_h1, min(stop_h0[i], run[i] + cont[i]))
  void (*bellman)(double* out, const double* run, const double* cont, const double* stop_h0, double stop_h1,
                  std::size_t n);
};

const KernelTable& scalar_kernels();
bool supported(Backend backend);
const KernelTable& kernels_for(Backend backend);

/// Kernels used by the solver: the best supported backend unless overridden.
const KernelTable& active_kernels();
Backend active_backend();
void set_active_backend(Backend backend);

std::string to_string(Backend backend);
Backend parse_backend(const std::string& text);

}  // namespace seqquant::simd
