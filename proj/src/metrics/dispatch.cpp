#include <cstdlib>
#include <string_view>

#include "capax/metrics/kernels.hpp"

namespace capax::metrics {

#if defined(CAPAX_HAVE_AVX2_TU)
namespace detail {
const KernelTable* avx2_table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(CAPAX_HAVE_AVX2_TU)
  return detail::avx2_table();
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(CAPAX_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

const KernelTable& select_kernels() {
  const char* forced = std::getenv("CAPAX_SIMD");
  const std::string_view choice = forced ? forced : "";
  if (choice == "scalar") return scalar_kernels();
  if (avx2_kernels() && cpu_supports_avx2()) return *avx2_kernels();
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select_kernels();
  return table;
}

}  // namespace capax::metrics
