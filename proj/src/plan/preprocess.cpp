#include "capax/plan/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "capax/metrics/kernels.hpp"
#include "capax/util/error.hpp"

namespace capax::plan {

namespace {

struct Tap {
  std::size_t index;
  double weight;
};

// Per-output-pixel source taps for box averaging over [x*scale, (x+1)*scale).
std::vector<std::vector<Tap>> area_taps(std::size_t in, std::size_t out) {
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  std::vector<std::vector<Tap>> taps(out);
  for (std::size_t x = 0; x < out; ++x) {
    const double lo = static_cast<double>(x) * scale;
    const double hi = std::min(static_cast<double>(x + 1) * scale, static_cast<double>(in));
    auto first = static_cast<std::size_t>(std::floor(lo));
    for (std::size_t s = first; s < in && static_cast<double>(s) < hi; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 1e-12) taps[x].push_back({s, overlap / scale});
    }
  }
  return taps;
}

double cubic_weight(double t) {
  constexpr double a = -0.75;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Half-pixel-centred bicubic taps with replicated borders.
std::vector<std::vector<Tap>> cubic_taps(std::size_t in, std::size_t out) {
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  std::vector<std::vector<Tap>> taps(out);
  const auto last = static_cast<std::ptrdiff_t>(in) - 1;
  for (std::size_t x = 0; x < out; ++x) {
    const double src = (static_cast<double>(x) + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double frac = src - base;
    for (int k = -1; k <= 2; ++k) {
      const auto idx = std::clamp(static_cast<std::ptrdiff_t>(base) + k, std::ptrdiff_t{0}, last);
      taps[x].push_back({static_cast<std::size_t>(idx), cubic_weight(frac - k)});
    }
  }
  return taps;
}

ImageTensor separable(const ImageTensor& in, const std::vector<std::vector<Tap>>& rows,
                      const std::vector<std::vector<Tap>>& cols) {
  const std::size_t out_h = rows.size();
  const std::size_t out_w = cols.size();
  // horizontal pass in double, then vertical
  std::vector<double> tmp(in.height * out_w, 0.0);
  for (std::size_t r = 0; r < in.height; ++r)
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (const auto& t : cols[c]) acc += t.weight * in.values[r * in.width + t.index];
      tmp[r * out_w + c] = acc;
    }
  ImageTensor out = make_image(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r)
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (const auto& t : rows[r]) acc += t.weight * tmp[t.index * out_w + c];
      out.values[r * out_w + c] = static_cast<float>(acc);
    }
  return out;
}

std::vector<std::vector<Tap>> identity_taps(std::size_t n) {
  std::vector<std::vector<Tap>> taps(n);
  for (std::size_t i = 0; i < n; ++i) taps[i].push_back({i, 1.0});
  return taps;
}

std::vector<std::vector<Tap>> axis_taps(std::size_t in, std::size_t out) {
  if (in == out) return identity_taps(in);
  return out < in ? area_taps(in, out) : cubic_taps(in, out);
}

void check_shape(const ImageTensor& image) {
  if (image.height == 0 || image.width == 0)
    throw Error(ErrorCode::DegenerateImage, "image has zero area");
  if (image.values.size() != image.height * image.width)
    throw Error(ErrorCode::InvalidArgument, "image buffer does not match its shape");
}

}  // namespace

ImageTensor make_image(std::size_t height, std::size_t width, float fill) {
  return ImageTensor{height, width, std::vector<float>(height * width, fill)};
}

ContentBox content_box(std::size_t height, std::size_t width, std::size_t target) {
  if (height == 0 || width == 0) throw Error(ErrorCode::DegenerateImage, "image has zero area");
  const std::size_t larger = std::max(height, width);
  auto scaled = [&](std::size_t n) {
    const auto v = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * static_cast<double>(target) / static_cast<double>(larger)));
    return std::clamp<std::size_t>(v, 1, target);
  };
  ContentBox box;
  box.height = scaled(height);
  box.width = scaled(width);
  box.top = (target - box.height) / 2;
  box.left = (target - box.width) / 2;
  return box;
}

ImageTensor resize_area(const ImageTensor& in, std::size_t height, std::size_t width) {
  check_shape(in);
  return separable(in, area_taps(in.height, height), area_taps(in.width, width));
}

ImageTensor resize_bicubic(const ImageTensor& in, std::size_t height, std::size_t width) {
  check_shape(in);
  return separable(in, cubic_taps(in.height, height), cubic_taps(in.width, width));
}

ImageTensor preprocess_image(const ImageTensor& raw, std::size_t target) {
  check_shape(raw);
  if (target == 0) throw Error(ErrorCode::InvalidArgument, "target size must be positive");

  const auto [lo, hi] = metrics::active_kernels().minmax(raw.values);
  ImageTensor scaled = raw;
  const float range = hi - lo;
  for (auto& v : scaled.values) v = range > 0.0f ? (v - lo) / range : 0.0f;

  const ContentBox box = content_box(raw.height, raw.width, target);
  ImageTensor content = separable(scaled, axis_taps(raw.height, box.height), axis_taps(raw.width, box.width));

  ImageTensor out = make_image(target, target);
  for (std::size_t r = 0; r < box.height; ++r)
    for (std::size_t c = 0; c < box.width; ++c)
      out.at(box.top + r, box.left + c) = std::clamp(content.at(r, c), 0.0f, 1.0f);
  return out;
}

void write_raw_image(const std::filesystem::path& path, const ImageTensor& image) {
  check_shape(image);
  std::ofstream data(path, std::ios::binary | std::ios::trunc);
  if (!data) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (float v : image.values) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    data.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  nlohmann::ordered_json header;
  header["height"] = image.height;
  header["width"] = image.width;
  header["dtype"] = "float32-le";
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  if (!side) throw Error(ErrorCode::Io, "cannot write sidecar for " + path.string());
  side << header.dump() << '\n';
}

ImageTensor read_raw_image(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw Error(ErrorCode::Io, "missing sidecar for " + path.string());
  const auto header = nlohmann::json::parse(side, nullptr, false);
  if (header.is_discarded() || !header.contains("height") || !header.contains("width"))
    throw Error(ErrorCode::Io, "malformed sidecar for " + path.string());
  if (header.value("dtype", std::string("float32-le")) != "float32-le")
    throw Error(ErrorCode::Io, "unsupported dtype in " + path.string());
  ImageTensor image = make_image(header["height"].get<std::size_t>(), header["width"].get<std::size_t>());
  std::ifstream data(path, std::ios::binary);
  if (!data) throw Error(ErrorCode::Io, "cannot read " + path.string());
  for (auto& v : image.values) {
    std::uint32_t bits = 0;
    if (!data.read(reinterpret_cast<char*>(&bits), sizeof bits))
      throw Error(ErrorCode::Io, path.string() + " is shorter than its sidecar shape");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    v = std::bit_cast<float>(bits);
  }
  return image;
}

}  // namespace capax::plan
