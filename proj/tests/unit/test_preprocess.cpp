#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "capax/plan/preprocess.hpp"
#include "capax/util/error.hpp"
#include "capax/util/rng.hpp"

using namespace capax;
using namespace capax::plan;

namespace {

ImageTensor random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  auto img = make_image(h, w);
  for (auto& v : img.values) v = static_cast<float>(rng.uniform() * 4000.0 - 1000.0);
  return img;
}

const std::filesystem::path kGolden = std::filesystem::path(CAPAX_GOLDEN_DIR) / "preprocess";

}  // namespace

TEST_CASE("content box") {
  auto b = content_box(512, 512);
  CHECK(b.height == 256);
  CHECK(b.width == 256);
  CHECK(b.top == 0);
  b = content_box(138, 192);
  CHECK(b.height == 184);
  CHECK(b.width == 256);
  CHECK(b.top == 36);
  CHECK(b.left == 0);
  b = content_box(255, 256);
  CHECK(b.top == 0);  // odd remainder: extra row goes to the bottom
  CHECK(b.height == 255);
  CHECK_THROWS_AS(content_box(0, 10), Error);
}

TEST_CASE("preprocess shapes and padding") {
  const auto big = preprocess_image(random_image(512, 512, 1));
  CHECK(big.height == 256);
  CHECK(big.width == 256);

  const auto small = preprocess_image(random_image(138, 192, 2));
  REQUIRE(small.height == 256);
  for (std::size_t c = 0; c < 256; ++c) {
    CHECK(small.at(35, c) == 0.0f);
    CHECK(small.at(220, c) == 0.0f);
  }
  float inner = 0.0f;
  for (std::size_t c = 0; c < 256; ++c) inner += small.at(128, c);
  CHECK(inner > 0.0f);

  const auto flat = preprocess_image(make_image(256, 256, 42.0f));
  CHECK(std::all_of(flat.values.begin(), flat.values.end(), [](float v) { return v == 0.0f; }));

  try {
    preprocess_image(ImageTensor{0, 5, {}});
    FAIL("expected DegenerateImage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateImage);
  }
}

TEST_CASE("preprocess range and aspect over random shapes") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t h = 138 + rng.below(375);
    const std::size_t w = 138 + rng.below(375);
    const auto out = preprocess_image(random_image(h, w, trial));
    REQUIRE(out.height == 256);
    REQUIRE(out.width == 256);
    for (float v : out.values) REQUIRE((v >= 0.0f && v <= 1.0f));
    const auto box = content_box(h, w);
    const double in_aspect = static_cast<double>(h) / static_cast<double>(w);
    const double lo = (box.height - 1.0) / (box.width + 1.0);
    const double hi = (box.height + 1.0) / (box.width - 1.0);
    CHECK(in_aspect >= lo);
    CHECK(in_aspect <= hi);
  }
}

TEST_CASE("area resize averages whole blocks") {
  auto img = make_image(4, 4);
  for (std::size_t i = 0; i < 16; ++i) img.values[i] = static_cast<float>(i);
  const auto half = resize_area(img, 2, 2);
  CHECK(half.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(half.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
}

TEST_CASE("bicubic resize keeps constants and interpolates ramps") {
  const auto flat = resize_bicubic(make_image(5, 7, 0.25f), 11, 13);
  for (float v : flat.values) CHECK(v == doctest::Approx(0.25f).epsilon(1e-6));
}

TEST_CASE("preprocess matches the OpenCV goldens") {
  const char* cases[] = {"down_20x30_t12", "down_40x40_t16", "down_33x17_t10", "up_14x21_t32", "up_9x6_t25"};
  for (const char* name : cases) {
    CAPTURE(name);
    const auto in = read_raw_image(kGolden / (std::string(name) + ".in.f32"));
    const auto expected = read_raw_image(kGolden / (std::string(name) + ".out.f32"));
    const auto got = preprocess_image(in, expected.height);
    REQUIRE(got.height == expected.height);
    REQUIRE(got.width == expected.width);
    double worst = 0.0;
    for (std::size_t i = 0; i < got.values.size(); ++i)
      worst = std::max(worst, static_cast<double>(std::abs(got.values[i] - expected.values[i])));
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("raw image round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "capax_raw_test";
  std::filesystem::create_directories(dir);
  const auto img = random_image(7, 9, 3);
  write_raw_image(dir / "a.f32", img);
  CHECK(std::filesystem::file_size(dir / "a.f32") == 7 * 9 * 4);
  CHECK(read_raw_image(dir / "a.f32") == img);
  CHECK_THROWS_AS(read_raw_image(dir / "missing.f32"), Error);
  std::filesystem::remove_all(dir);
}
