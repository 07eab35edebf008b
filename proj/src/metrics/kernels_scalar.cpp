#include <algorithm>
#include <cmath>

#include "capax/metrics/kernels.hpp"

namespace capax::metrics {

namespace {

ConfusionCounts confusion_scalar(std::span<const std::uint8_t> labels, std::span<const double> probs) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] != 0;
    const bool pred = probs[i] >= 0.5;
    if (truth && pred) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double nll_sum_scalar(std::span<const std::uint8_t> labels, std::span<const double> probs, double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double q = labels[i] != 0 ? probs[i] : 1.0 - probs[i];
    sum -= std::log(std::clamp(q, eps, 1.0 - eps));
  }
  return sum;
}

std::pair<float, float> minmax_scalar(std::span<const float> values) {
  float lo = values[0];
  float hi = values[0];
  for (float v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &confusion_scalar, &nll_sum_scalar, &minmax_scalar};
  return table;
}

}  // namespace capax::metrics
