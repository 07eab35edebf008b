#include "capax/synth/surface.hpp"

#include "capax/util/error.hpp"

namespace capax::synth {

namespace {

enum Coef : std::size_t {
  kIntercept = 0,
  kShort = 1,
  kResNetLong = 2,
  kResNetShort = 3,
  kVggLong = 4,
  kVggShort = 5,
  kLogDataset = 6,
  kLrSlopeFirst = 7,  // EfficientNet long, then short; ResNet long, short; VGG long, short
  kLogReg = 13,
};

std::size_t lr_slope_index(grid::Family f, grid::ModelSize s) {
  const std::size_t family = f == grid::Family::EfficientNet ? 0 : f == grid::Family::ResNet ? 1 : 2;
  return kLrSlopeFirst + 2 * family + (s == grid::ModelSize::Short ? 1 : 0);
}

}  // namespace

ResponseSurface ResponseSurface::reference(double sigma, ClampMode mode) {
  ResponseSurface s;
  s.coefficients = {-0.5810, 0.0016, -0.0936, -0.1107, -0.3903, -0.3237, 0.1627,
                    0.0158,  0.0193, 0.0130,  0.0111,  -0.0281, -0.0193, -0.0003};
  s.sigma = sigma;
  s.clamp_mode = mode;
  return s;
}

double surface_mean(const grid::ExperimentCondition& c, const ResponseSurface& surface) {
  if (c.lr <= 0.0 || c.reg <= 0.0 || c.dataset_size == 0)
    throw Error(ErrorCode::InvalidArgument, "condition values must be positive for the log terms");
  const auto& b = surface.coefficients;
  const bool is_short = c.size == grid::ModelSize::Short;

  double mean = b[kIntercept];
  if (is_short) mean += b[kShort];
  if (c.family == grid::Family::ResNet) mean += is_short ? b[kResNetShort] : b[kResNetLong];
  if (c.family == grid::Family::VGG) mean += is_short ? b[kVggShort] : b[kVggLong];
  mean += b[kLogDataset] * std::log(static_cast<double>(grid::dev_images(c)));
  mean += b[lr_slope_index(c.family, c.size)] * std::log(c.lr);
  mean += b[kLogReg] * std::log(c.reg);
  return mean;
}

}  // namespace capax::synth
