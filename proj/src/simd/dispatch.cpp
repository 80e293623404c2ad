#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mflab/simd/kernels.hpp"

namespace mflab::simd {

#if defined(MFLAB_WITH_AVX2)
const KernelTable* avx2_table_impl();
#endif

namespace {

bool cpu_has_avx2_fma() {
#if defined(MFLAB_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_initial() {
  const char* env = std::getenv("MFLAB_SIMD");
  if (env != nullptr && std::string(env) == "scalar") {
    return &scalar_table();
  }
  if (const KernelTable* t = avx2_table(); t != nullptr) {
    return t;
  }
  return &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_initial()};
  return slot;
}

} // namespace

const KernelTable* avx2_table() {
#if defined(MFLAB_WITH_AVX2)
  static const bool ok = cpu_has_avx2_fma();
  return ok ? avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

bool backend_available(Backend b) {
  return b == Backend::Scalar || avx2_table() != nullptr;
}

Backend active_backend() { return kernels().backend; }

void set_backend(Backend b) {
  if (b == Backend::Scalar) {
    active_slot().store(&scalar_table());
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) {
    throw std::runtime_error("AVX2 kernels are not available on this host");
  }
  active_slot().store(t);
}

std::string_view backend_name(Backend b) {
  return b == Backend::Scalar ? "scalar" : "avx2";
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

} // namespace mflab::simd
