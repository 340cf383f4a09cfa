#include <atomic>

#include "lhom/errors.hpp"
#include "lhom/kernels.hpp"

namespace lhom::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  if (const KernelTable* t = table_for(Backend::Avx2)) return t;
  if (const KernelTable* t = table_for(Backend::Neon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*> g_forced{nullptr};

}  // namespace

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &scalar_table();
    case Backend::Avx2:
#if defined(LHOM_HAVE_AVX2)
      if (cpu_has_avx2_fma()) return detail::avx2_table();
#endif
      return nullptr;
    case Backend::Neon:
#if defined(LHOM_HAVE_NEON)
      return detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() {
  if (const KernelTable* forced = g_forced.load(std::memory_order_acquire)) return *forced;
  static const KernelTable* const detected = detect();
  return *detected;
}

void force_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (t == nullptr)
    throw InvalidArgument("kernel backend '" + std::string(backend_name(backend)) +
                          "' is not available on this machine");
  g_forced.store(t, std::memory_order_release);
}

void reset_backend() { g_forced.store(nullptr, std::memory_order_release); }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace lhom::kernels
