#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "simd/kernels_impl.hpp"

namespace rfcvnn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(RFCVNN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve_initial() {
  if (const char* env = std::getenv("RFCVNN_SIMD")) {
    if (auto b = parse_backend(env)) {
      if (const KernelTable* t = table_for(*b)) return t;
    }
  }
  return table_for(best_backend());
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{resolve_initial()};
  return slot;
}

}  // namespace

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &detail::scalar_table();
    case Backend::kAvx2:
#if defined(RFCVNN_HAVE_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
    case Backend::kNeon:
#if defined(RFCVNN_HAVE_NEON)
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::kScalar, Backend::kAvx2, Backend::kNeon})
    if (table_for(b) != nullptr) out.push_back(b);
  return out;
}

Backend best_backend() {
  if (table_for(Backend::kAvx2)) return Backend::kAvx2;
  if (table_for(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (t == nullptr)
    throw std::invalid_argument("SIMD backend '" + std::string(to_string(backend)) +
                                "' is not available on this host");
  active_slot().store(t, std::memory_order_release);
}

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  if (name == "neon") return Backend::kNeon;
  return std::nullopt;
}

ScopedBackend::ScopedBackend(Backend backend) : previous_(kernels().backend) { set_backend(backend); }
ScopedBackend::~ScopedBackend() { set_backend(previous_); }

}  // namespace rfcvnn::simd
