#include "gazecal/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace gazecal::kernels {

namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend* pick(const char* name) {
  if (name && std::strcmp(name, "scalar") == 0) return &scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
  if (name && std::strcmp(name, "avx2") == 0) {
    return avx2_supported() ? &avx2_backend() : nullptr;
  }
#endif
  return nullptr;
}

const Backend* detect() {
  if (const Backend* forced = pick(std::getenv("GAZECAL_KERNELS"))) return forced;
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) return &avx2_backend();
#endif
  return &scalar_backend();
}

std::atomic<const Backend*> g_active{nullptr};

}  // namespace

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = detect();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

bool force_backend(const char* name) {
  if (const Backend* b = pick(name)) {
    g_active.store(b, std::memory_order_release);
    return true;
  }
  return false;
}

bool backend_available(const char* name) { return pick(name) != nullptr; }

}  // namespace gazecal::kernels
