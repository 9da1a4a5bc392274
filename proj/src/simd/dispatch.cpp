#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hyploop/errors.hpp"
#include "hyploop/simd/kernels.hpp"

namespace hyploop::simd {

#if HYPLOOP_BUILD_AVX2
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if HYPLOOP_BUILD_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() {
  const char* env = std::getenv("HYPLOOP_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) {
  if (b == Backend::scalar) {
    current().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const KernelTable* t = avx2_table();
  if (!t) throw DomainError("AVX2 kernels are not available on this machine or build");
  current().store(t, std::memory_order_release);
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace hyploop::simd
