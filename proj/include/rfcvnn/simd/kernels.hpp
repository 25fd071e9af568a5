#pragma once

// Dense double-precision kernels behind conv2d and the optimizers.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2+FMA
// on x86-64, NEON on aarch64) are compiled when the target supports them and
// picked at runtime. RFCVNN_SIMD={scalar,avx2,neon} in the environment forces
// a backend at first use.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace rfcvnn::simd {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  Backend backend;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // c[i*ldc + j] = sum_l a[i*lda + l] * b[j*ldb + l]     (C = A * B^T)
  void (*gemm_abt)(std::size_t m, std::size_t n, std::size_t k,
                   const double* a, std::size_t lda,
                   const double* b, std::size_t ldb,
                   double* c, std::size_t ldc);

  // c[i*ldc + j] += sum_l a[i*a_rs + l*a_cs] * b[l*ldb + j]
  // A is addressed through explicit strides so a transposed view costs nothing.
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k,
                   const double* a, std::size_t a_rs, std::size_t a_cs,
                   const double* b, std::size_t ldb,
                   double* c, std::size_t ldc);
};

/// Active table. Resolved once on first call unless set_backend() intervenes.
const KernelTable& kernels();

/// Table for a specific backend, or nullptr when it is not compiled in or the
/// CPU lacks the instructions.
const KernelTable* table_for(Backend backend);

std::vector<Backend> available_backends();
Backend best_backend();

/// Throws std::invalid_argument if the backend is unavailable on this host.
void set_backend(Backend backend);

std::string_view to_string(Backend backend);
std::optional<Backend> parse_backend(std::string_view name);

/// Switches the active backend for the lifetime of the guard.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace rfcvnn::simd
