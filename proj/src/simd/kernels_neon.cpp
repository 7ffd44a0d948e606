#include <arm_neon.h>

#include <cmath>

#include "dvit/simd/kernels.hpp"

namespace dvit::simd {

namespace {

// Two float64x2 registers hold the four reduction lanes {0,1} and {2,3}.
double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t body = n & ~std::size_t{3};
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  for (std::size_t j = 0; j < body; j += 4) {
    lo = vfmaq_f64(lo, vld1q_f64(a + j), vld1q_f64(b + j));
    hi = vfmaq_f64(hi, vld1q_f64(a + j + 2), vld1q_f64(b + j + 2));
  }
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (std::size_t j = body; j < n; ++j) lane[j % 4] = std::fma(a[j], b[j], lane[j % 4]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const std::size_t body = n & ~std::size_t{1};
  const float64x2_t va = vdupq_n_f64(alpha);
  for (std::size_t j = 0; j < body; j += 2)
    vst1q_f64(y + j, vfmaq_f64(vld1q_f64(y + j), va, vld1q_f64(x + j)));
  for (std::size_t j = body; j < n; ++j) y[j] = std::fma(alpha, x[j], y[j]);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = a[i * k + t];
      if (av == 0.0) continue;
      axpy(av, b + t * n, crow, n);
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(a + i * k, b + j * k, k);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t t = 0; t < k; ++t) {
    const double* brow = b + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[t * m + i];
      if (av == 0.0) continue;
      axpy(av, brow, c + i * n, n);
    }
  }
}

}  // namespace

const KernelSet& neon_kernels() {
  static const KernelSet set{"neon", dot, axpy, gemm_nn, gemm_nt, gemm_tn};
  return set;
}

}  // namespace dvit::simd
