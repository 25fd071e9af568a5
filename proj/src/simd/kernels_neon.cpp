// aarch64 only; NEON is part of the base ISA there.
#include <arm_neon.h>

#include "simd/kernels_impl.hpp"

namespace rfcvnn::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_abt(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    const double* a0 = a + i * lda;
    const double* a1 = a0 + lda;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = b + j * ldb;
      const double* b1 = b0 + ldb;
      float64x2_t c00 = vdupq_n_f64(0.0), c01 = vdupq_n_f64(0.0);
      float64x2_t c10 = vdupq_n_f64(0.0), c11 = vdupq_n_f64(0.0);
      std::size_t l = 0;
      for (; l + 2 <= k; l += 2) {
        const float64x2_t vb0 = vld1q_f64(b0 + l);
        const float64x2_t vb1 = vld1q_f64(b1 + l);
        const float64x2_t va0 = vld1q_f64(a0 + l);
        const float64x2_t va1 = vld1q_f64(a1 + l);
        c00 = vfmaq_f64(c00, va0, vb0);
        c01 = vfmaq_f64(c01, va0, vb1);
        c10 = vfmaq_f64(c10, va1, vb0);
        c11 = vfmaq_f64(c11, va1, vb1);
      }
      double s00 = vaddvq_f64(c00), s01 = vaddvq_f64(c01);
      double s10 = vaddvq_f64(c10), s11 = vaddvq_f64(c11);
      for (; l < k; ++l) {
        s00 += a0[l] * b0[l];
        s01 += a0[l] * b1[l];
        s10 += a1[l] * b0[l];
        s11 += a1[l] * b1[l];
      }
      c[i * ldc + j] = s00;
      c[i * ldc + j + 1] = s01;
      c[(i + 1) * ldc + j] = s10;
      c[(i + 1) * ldc + j + 1] = s11;
    }
    for (; j < n; ++j) {
      c[i * ldc + j] = dot(a0, b + j * ldb, k);
      c[(i + 1) * ldc + j] = dot(a1, b + j * ldb, k);
    }
  }
  for (; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = dot(a + i * lda, b + j * ldb, k);
}

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
              std::size_t a_cs, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    const double* arow = a + i * a_rs;
    std::size_t l = 0;
    for (; l + 2 <= k; l += 2) {
      const double s0 = arow[l * a_cs];
      const double s1 = arow[(l + 1) * a_cs];
      const float64x2_t v0 = vdupq_n_f64(s0);
      const float64x2_t v1 = vdupq_n_f64(s1);
      const double* b0 = b + l * ldb;
      const double* b1 = b0 + ldb;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t acc = vld1q_f64(crow + j);
        acc = vfmaq_f64(acc, v0, vld1q_f64(b0 + j));
        acc = vfmaq_f64(acc, v1, vld1q_f64(b1 + j));
        vst1q_f64(crow + j, acc);
      }
      for (; j < n; ++j) crow[j] += s0 * b0[j] + s1 * b1[j];
    }
    for (; l < k; ++l) axpy(arow[l * a_cs], b + l * ldb, crow, n);
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Backend::kNeon, &dot, &axpy, &gemm_abt, &gemm_acc};
  return table;
}

}  // namespace rfcvnn::simd::detail
