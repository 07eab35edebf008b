#include "capax/metrics/metrics.hpp"

#include <cmath>
#include <string>

#include "capax/util/error.hpp"

namespace capax::metrics {

void validate(const PixelBatch& batch) {
  if (batch.labels.empty()) throw Error(ErrorCode::InvalidArgument, "pixel batch is empty");
  if (batch.labels.size() != batch.probs.size())
    throw Error(ErrorCode::InvalidArgument, "labels and predictions differ in length");
  for (auto y : batch.labels)
    if (y > 1) throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(y) + " is not binary");
  for (double p : batch.probs)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "prediction outside [0,1]");
}

double bce(const PixelBatch& batch, double eps) {
  validate(batch);
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::InvalidArgument, "bce eps must lie in (0, 0.5)");
  return active_kernels().nll_sum(batch.labels, batch.probs, eps) / static_cast<double>(batch.size());
}

double dice_from_counts(const ConfusionCounts& c, const DiceOptions& options) {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return options.both_empty;
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double dice(const PixelBatch& batch, const DiceOptions& options) {
  validate(batch);
  return dice_from_counts(active_kernels().confusion(batch.labels, batch.probs), options);
}

double mean_image_dice(std::span<const PixelBatch> images, const DiceOptions& options) {
  if (images.empty()) throw Error(ErrorCode::InvalidArgument, "no images to average");
  double sum = 0.0;
  for (const auto& img : images) sum += dice(img, options);
  return sum / static_cast<double>(images.size());
}

double pooled_dice(std::span<const PixelBatch> images, const DiceOptions& options) {
  if (images.empty()) throw Error(ErrorCode::InvalidArgument, "no images to pool");
  ConfusionCounts total;
  for (const auto& img : images) {
    validate(img);
    const auto c = active_kernels().confusion(img.labels, img.probs);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    total.tn += c.tn;
  }
  return dice_from_counts(total, options);
}

double pooled_bce(std::span<const PixelBatch> images, double eps) {
  if (images.empty()) throw Error(ErrorCode::InvalidArgument, "no images to pool");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& img : images) {
    validate(img);
    sum += active_kernels().nll_sum(img.labels, img.probs, eps);
    n += img.size();
  }
  return sum / static_cast<double>(n);
}

}  // namespace capax::metrics
