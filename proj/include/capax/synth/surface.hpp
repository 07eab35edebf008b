#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "capax/grid/types.hpp"

namespace capax::synth {

enum class ClampMode { raw, clamped };

/// Coefficients of the reference DICE model, in design-matrix column order:
/// intercept, short offset, the four nested family offsets
/// (long/ResNet, short/ResNet, long/VGG, short/VGG), log dev-set size, the six
/// log(lr) slopes (long/short for EfficientNet, ResNet, VGG), log(reg).
struct ResponseSurface {
  static constexpr std::size_t kWidth = 14;

  std::array<double, kWidth> coefficients{};
  double sigma = 0.0;
  ClampMode clamp_mode = ClampMode::raw;

  /// Reference fit with residual sd sqrt(23.7779 / 1606).
  static ResponseSurface reference(double sigma = std::sqrt(23.7779 / 1606.0),
                                   ClampMode mode = ClampMode::raw);
};

/// Expected test DICE of a condition: natural logs, dev-set image count as
/// the dataset covariate.
double surface_mean(const grid::ExperimentCondition& condition, const ResponseSurface& surface);

}  // namespace capax::synth
