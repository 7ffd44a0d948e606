#pragma once

// Dense double-precision kernels behind the tensor ops.
//
// Every variant must produce bit-identical results to the scalar reference:
// products are accumulated with fused multiply-add, and reductions use four
// interleaved partial sums (element j goes to lane j % 4) combined as
// (l0 + l1) + (l2 + l3). The vector variants follow the same order, so
// switching the active kernel set never changes a training run.

#include <cstddef>
#include <span>
#include <string_view>

namespace dvit::simd {

struct KernelSet {
  const char* name;

  /// Sum_j a[j] * b[j].
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[j] = fma(alpha, x[j], y[j]).
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// C[m x n] += A[m x k] * B[k x n], all row-major and contiguous.
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
  /// C[m x n] += A[m x k] * B[n x k]^T.
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
  /// C[m x n] += A[k x m]^T * B[k x n].
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
};

const KernelSet& scalar_kernels();
#if defined(DVIT_HAVE_AVX2)
const KernelSet& avx2_kernels();
#endif
#if defined(DVIT_HAVE_NEON)
const KernelSet& neon_kernels();
#endif

/// Kernel sets compiled in and supported by the running CPU, scalar first.
std::span<const KernelSet* const> available_kernels();

/// The set used by tensor ops. Chosen on first use: the environment variable
/// DVIT_KERNELS (a kernel set name) if set, otherwise the widest supported.
const KernelSet& active_kernels();

/// Switches the active set by name; returns false if it is not available.
bool select_kernels(std::string_view name);

}  // namespace dvit::simd
