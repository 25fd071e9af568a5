// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "simd/kernels_impl.hpp"

namespace rfcvnn::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// 4x2 register block: four rows of A against two rows of B.
void block_4x2(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb,
               double* c, std::size_t ldc) {
  const double* a0 = a;
  const double* a1 = a + lda;
  const double* a2 = a + 2 * lda;
  const double* a3 = a + 3 * lda;
  const double* b0 = b;
  const double* b1 = b + ldb;
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  std::size_t l = 0;
  for (; l + 4 <= k; l += 4) {
    const __m256d vb0 = _mm256_loadu_pd(b0 + l);
    const __m256d vb1 = _mm256_loadu_pd(b1 + l);
    __m256d va = _mm256_loadu_pd(a0 + l);
    c00 = _mm256_fmadd_pd(va, vb0, c00);
    c01 = _mm256_fmadd_pd(va, vb1, c01);
    va = _mm256_loadu_pd(a1 + l);
    c10 = _mm256_fmadd_pd(va, vb0, c10);
    c11 = _mm256_fmadd_pd(va, vb1, c11);
    va = _mm256_loadu_pd(a2 + l);
    c20 = _mm256_fmadd_pd(va, vb0, c20);
    c21 = _mm256_fmadd_pd(va, vb1, c21);
    va = _mm256_loadu_pd(a3 + l);
    c30 = _mm256_fmadd_pd(va, vb0, c30);
    c31 = _mm256_fmadd_pd(va, vb1, c31);
  }
  double s[4][2] = {{hsum(c00), hsum(c01)},
                    {hsum(c10), hsum(c11)},
                    {hsum(c20), hsum(c21)},
                    {hsum(c30), hsum(c31)}};
  for (; l < k; ++l) {
    const double* rows[4] = {a0, a1, a2, a3};
    for (int r = 0; r < 4; ++r) {
      s[r][0] += rows[r][l] * b0[l];
      s[r][1] += rows[r][l] * b1[l];
    }
  }
  for (int r = 0; r < 4; ++r) {
    c[r * ldc] = s[r][0];
    c[r * ldc + 1] = s[r][1];
  }
}

void gemm_abt(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2)
      block_4x2(k, a + i * lda, lda, b + j * ldb, ldb, c + i * ldc + j, ldc);
    for (; j < n; ++j)
      for (std::size_t r = 0; r < 4; ++r) c[(i + r) * ldc + j] = dot(a + (i + r) * lda, b + j * ldb, k);
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
    // Four rank-1 updates per pass over the C row.
    for (; l + 4 <= k; l += 4) {
      const double s0 = arow[l * a_cs];
      const double s1 = arow[(l + 1) * a_cs];
      const double s2 = arow[(l + 2) * a_cs];
      const double s3 = arow[(l + 3) * a_cs];
      const __m256d v0 = _mm256_set1_pd(s0);
      const __m256d v1 = _mm256_set1_pd(s1);
      const __m256d v2 = _mm256_set1_pd(s2);
      const __m256d v3 = _mm256_set1_pd(s3);
      const double* b0 = b + l * ldb;
      const double* b1 = b0 + ldb;
      const double* b2 = b1 + ldb;
      const double* b3 = b2 + ldb;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d acc = _mm256_loadu_pd(crow + j);
        acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(b0 + j), acc);
        acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(b1 + j), acc);
        acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(b2 + j), acc);
        acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(b3 + j), acc);
        _mm256_storeu_pd(crow + j, acc);
      }
      for (; j < n; ++j) crow[j] += s0 * b0[j] + s1 * b1[j] + s2 * b2[j] + s3 * b3[j];
    }
    for (; l < k; ++l) axpy(arow[l * a_cs], b + l * ldb, crow, n);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Backend::kAvx2, &dot, &axpy, &gemm_abt, &gemm_acc};
  return table;
}

}  // namespace rfcvnn::simd::detail
