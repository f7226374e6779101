#include <atomic>

#include "gm/kernels.hpp"

namespace gm::kernels {

#if defined(GM_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table_unchecked() noexcept;
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(GM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect_best() noexcept {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& selected() noexcept {
  static std::atomic<const KernelTable*> table{detect_best()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
#if defined(GM_HAVE_AVX2_KERNELS)
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *selected().load(std::memory_order_relaxed); }

bool select(Backend backend) noexcept {
  switch (backend) {
    case Backend::Auto:
      selected().store(detect_best(), std::memory_order_relaxed);
      return true;
    case Backend::Scalar:
      selected().store(&scalar_table(), std::memory_order_relaxed);
      return true;
    case Backend::Avx2:
      if (const KernelTable* t = avx2_table()) {
        selected().store(t, std::memory_order_relaxed);
        return true;
      }
      return false;
  }
  return false;
}

}  // namespace gm::kernels
