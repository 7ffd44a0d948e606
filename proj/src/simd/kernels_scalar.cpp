#include <cmath>

#include "dvit/simd/kernels.hpp"

namespace dvit::simd {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) lane[j % 4] = std::fma(a[j], b[j], lane[j % 4]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] = std::fma(alpha, x[j], y[j]);
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

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar", dot, axpy, gemm_nn, gemm_nt, gemm_tn};
  return set;
}

}  // namespace dvit::simd
