#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace capax::plan {

/// Row-major single-channel image.
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  float at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
  float& at(std::size_t row, std::size_t col) { return values[row * width + col]; }

  bool operator==(const ImageTensor&) const = default;
};

ImageTensor make_image(std::size_t height, std::size_t width, float fill = 0.0f);

/// Placement of the resized content inside the padded square.
struct ContentBox {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Content size and padding for an input of the given shape.
ContentBox content_box(std::size_t height, std::size_t width, std::size_t target = 256);

/// Min-max rescale to [0,1], resize so the larger side equals `target`
/// (area averaging when shrinking, bicubic when enlarging), then zero-pad to
/// target x target. Odd padding puts the extra pixel on the bottom/right.
/// Throws DegenerateImage for a zero-area input.
ImageTensor preprocess_image(const ImageTensor& raw, std::size_t target = 256);

/// Resamplers along both axes, exposed for parity tests.
ImageTensor resize_area(const ImageTensor& in, std::size_t height, std::size_t width);
ImageTensor resize_bicubic(const ImageTensor& in, std::size_t height, std::size_t width);

/// Writes `path` as little-endian float32 and `path` + ".json" with the shape.
void write_raw_image(const std::filesystem::path& path, const ImageTensor& image);
ImageTensor read_raw_image(const std::filesystem::path& path);

}  // namespace capax::plan
