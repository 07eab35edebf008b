#pragma once

// Pixel-loop kernels behind the metrics and preprocessing code. Each kernel
// has a scalar reference and, where the target allows, an AVX2 variant; the
// variant is picked once at startup from CPUID and can be forced with
// CAPAX_SIMD=scalar|avx2.

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace capax::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct KernelTable {
  std::string_view name;

  /// Counts against predictions rounded at 0.5 (ties round up). Nonzero
  /// labels are foreground. Spans must have equal length.
  ConfusionCounts (*confusion)(std::span<const std::uint8_t> labels, std::span<const double> probs);

  /// Sum over pixels of -log(p) where p is the clamped probability assigned
  /// to the true label; divide by N for BCE.
  double (*nll_sum)(std::span<const std::uint8_t> labels, std::span<const double> probs, double eps);

  /// Smallest and largest value of a non-empty span.
  std::pair<float, float> (*minmax)(std::span<const float> values);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 translation unit is not part of the build.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

/// The table used by the metrics functions.
const KernelTable& active_kernels();

}  // namespace capax::metrics
