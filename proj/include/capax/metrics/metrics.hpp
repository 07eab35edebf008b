#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "capax/metrics/kernels.hpp"

namespace capax::metrics {

/// Non-owning view of one set of pixels: binary labels and predicted
/// foreground probabilities of equal, non-zero length.
struct PixelBatch {
  std::span<const std::uint8_t> labels;
  std::span<const double> probs;

  std::size_t size() const { return labels.size(); }
};

/// Throws InvalidArgument unless labels are 0/1, probs lie in [0,1] and the
/// lengths agree and are positive.
void validate(const PixelBatch& batch);

inline constexpr double kDefaultBceEps = 1e-7;

/// Mean binary cross-entropy; the probability given to each true class is
/// clamped to [eps, 1-eps].
double bce(const PixelBatch& batch, double eps = kDefaultBceEps);

struct DiceOptions {
  /// Returned when labels and rounded predictions are both empty.
  double both_empty = 1.0;
};

/// 2TP / (2TP + FP + FN) with predictions rounded at 0.5, ties up.
double dice(const PixelBatch& batch, const DiceOptions& options = {});

double dice_from_counts(const ConfusionCounts& counts, const DiceOptions& options = {});

/// Per-image DICE averaged over images; this is the reduction used for a
/// run's reported value.
double mean_image_dice(std::span<const PixelBatch> images, const DiceOptions& options = {});

/// DICE over the pooled confusion counts of all images.
double pooled_dice(std::span<const PixelBatch> images, const DiceOptions& options = {});

/// Pixel-weighted mean BCE over all images.
double pooled_bce(std::span<const PixelBatch> images, double eps = kDefaultBceEps);

}  // namespace capax::metrics
