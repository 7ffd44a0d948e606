#include <immintrin.h>

#include <cmath>

#include "dvit/simd/kernels.hpp"

namespace dvit::simd {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t body = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t j = 0; j < body; j += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = body; j < n; ++j) lane[j % 4] = std::fma(a[j], b[j], lane[j % 4]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const std::size_t body = n & ~std::size_t{3};
  const __m256d va = _mm256_set1_pd(alpha);
  for (std::size_t j = 0; j < body; j += 4)
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  for (std::size_t j = body; j < n; ++j) y[j] = std::fma(alpha, x[j], y[j]);
}

// Four rows of B per pass over a C row. Each C element still receives its
// fma updates in increasing t, so results match the scalar loop exactly.
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  const std::size_t body = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < body; j += 4) {
      __m256d acc = _mm256_loadu_pd(crow + j);
      for (std::size_t t = 0; t < k; ++t) {
        const double av = arow[t];
        if (av == 0.0) continue;
        acc = _mm256_fmadd_pd(_mm256_set1_pd(av), _mm256_loadu_pd(b + t * n + j), acc);
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (std::size_t j = body; j < n; ++j) {
      double acc = crow[j];
      for (std::size_t t = 0; t < k; ++t) {
        const double av = arow[t];
        if (av == 0.0) continue;
        acc = std::fma(av, b[t * n + j], acc);
      }
      crow[j] = acc;
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

const KernelSet& avx2_kernels() {
  static const KernelSet set{"avx2", dot, axpy, gemm_nn, gemm_nt, gemm_tn};
  return set;
}

}  // namespace dvit::simd
