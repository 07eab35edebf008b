#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "capax/metrics/aggregate.hpp"
#include "capax/metrics/kernels.hpp"
#include "capax/metrics/metrics.hpp"
#include "capax/util/error.hpp"
#include "capax/util/rng.hpp"

using namespace capax;
using namespace capax::metrics;

namespace {

struct Owned {
  std::vector<std::uint8_t> y;
  std::vector<double> p;
  PixelBatch view() const { return {y, p}; }
};

Owned random_batch(Rng& rng, std::size_t n) {
  Owned b;
  for (std::size_t i = 0; i < n; ++i) {
    b.y.push_back(static_cast<std::uint8_t>(rng.below(2)));
    const auto pick = rng.below(10);
    b.p.push_back(pick == 0 ? 0.5 : pick == 1 ? 0.0 : pick == 2 ? 1.0 : rng.uniform());
  }
  return b;
}

grid::RunRecord record_with_dice(double dice, const std::string& model = "B0", std::size_t size = 200) {
  grid::RunRecord r;
  const auto [family, ls] = grid::parse_model(model);
  r.spec = grid::make_run_spec({family, ls, size, 1e-3, 1e-4}, 0, 0);
  r.result.run_id = r.spec.run_id;
  r.result.status = grid::RunStatus::completed;
  r.result.final_metrics = grid::FinalMetrics{1, 0.1, dice, 0.2, dice};
  return r;
}

}  // namespace

TEST_CASE("bce worked values") {
  const std::vector<std::uint8_t> one{1};
  const std::vector<double> half{0.5};
  CHECK(bce({one, half}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const std::vector<std::uint8_t> y{1, 0};
  const std::vector<double> p{0.9, 0.2};
  CHECK(bce({y, p}) == doctest::Approx(0.164252).epsilon(1e-6));

  const std::vector<std::uint8_t> exact_y{1, 0, 1};
  const std::vector<double> exact_p{1.0, 0.0, 1.0};
  CHECK(bce({exact_y, exact_p}) == doctest::Approx(-std::log(1.0 - 1e-7)).epsilon(1e-9));
}

TEST_CASE("dice worked values") {
  const std::vector<std::uint8_t> y{1, 1, 0, 0};
  const std::vector<double> p{0.9, 0.2, 0.1, 0.8};
  CHECK(dice({y, p}) == 0.5);

  const std::vector<double> same{1.0, 0.7, 0.2, 0.4999};
  CHECK(dice({y, same}) == 1.0);

  const std::vector<std::uint8_t> empty_y(4, 0);
  const std::vector<double> empty_p(4, 0.1);
  CHECK(dice({empty_y, empty_p}) == 1.0);
  CHECK(dice({empty_y, empty_p}, DiceOptions{0.0}) == 0.0);

  const std::vector<std::uint8_t> tie_y{1};
  const std::vector<double> tie_p{0.5};
  CHECK(dice({tie_y, tie_p}) == 1.0);
}

TEST_CASE("batch validation") {
  const std::vector<std::uint8_t> y{1, 2};
  const std::vector<double> p{0.1, 0.2};
  CHECK_THROWS_AS(validate({y, p}), Error);
  const std::vector<std::uint8_t> ok{1, 0};
  const std::vector<double> bad{0.1, 1.5};
  CHECK_THROWS_AS(dice({ok, bad}), Error);
  const std::vector<double> shorter{0.1};
  CHECK_THROWS_AS(bce({ok, shorter}), Error);
  CHECK_THROWS_AS(bce({{}, {}}), Error);
}

TEST_CASE("dice is permutation invariant") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    auto b = random_batch(rng, 64);
    const double before = dice(b.view());
    std::vector<std::size_t> order(64);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    Owned q;
    for (auto i : order) {
      q.y.push_back(b.y[i]);
      q.p.push_back(b.p[i]);
    }
    CHECK(dice(q.view()) == before);
  }
}

TEST_CASE("bce falls as predictions approach the labels") {
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    auto b = random_batch(rng, 16);
    double last = bce(b.view());
    for (int step = 0; step < 10; ++step) {
      for (std::size_t i = 0; i < b.p.size(); ++i) b.p[i] += 0.3 * (b.y[i] - b.p[i]);
      const double now = bce(b.view());
      CHECK(now <= last + 1e-15);
      last = now;
    }
  }
}

TEST_CASE("dice is not symmetric under complement") {
  const std::vector<std::uint8_t> y{1, 0, 0, 0};
  const std::vector<double> p{1.0, 1.0, 0.0, 0.0};
  const std::vector<std::uint8_t> ny{0, 1, 1, 1};
  const std::vector<double> np{0.0, 0.0, 1.0, 1.0};
  CHECK(dice({y, p}) != doctest::Approx(dice({ny, np})));
}

TEST_CASE("image reductions") {
  const std::vector<std::uint8_t> y1{1, 1, 0, 0}, y2{0, 0, 0, 1};
  const std::vector<double> p1{0.9, 0.2, 0.1, 0.8}, p2{0.0, 0.0, 0.0, 1.0};
  const std::vector<PixelBatch> images{{y1, p1}, {y2, p2}};
  CHECK(mean_image_dice(images) == doctest::Approx(0.75));
  // pooled: TP=2, FP=1, FN=1
  CHECK(pooled_dice(images) == doctest::Approx(4.0 / 6.0));
  const double pooled = pooled_bce(images);
  CHECK(pooled == doctest::Approx((bce(images[0]) * 4 + bce(images[1]) * 4) / 8));
}

TEST_CASE("quantiles and summaries") {
  const std::vector<double> v{0.8, 0.2, 0.6, 0.4};
  const auto s = summarize(v);
  CHECK(s.median == doctest::Approx(0.5));
  CHECK(s.iqr_low == doctest::Approx(0.35));
  CHECK(s.iqr_high == doctest::Approx(0.65));
  CHECK(s.mean == doctest::Approx(0.5));
  CHECK(s.n_runs == 4);

  const std::vector<double> one{0.7};
  const auto single = summarize(one);
  CHECK(single.mean == 0.7);
  CHECK(single.median == 0.7);
  CHECK(single.iqr_low == 0.7);
  CHECK(single.iqr_high == 0.7);
  CHECK_THROWS(summarize(std::span<const double>{}));
}

TEST_CASE("aggregate by model and dataset") {
  std::vector<grid::RunRecord> records;
  for (const char* model : {"B0", "R50"})
    for (std::size_t size : {200u, 1000u})
      for (int i = 0; i < 3; ++i) records.push_back(record_with_dice(0.1 * i, model, size));
  auto failed = record_with_dice(0.9);
  failed.result.status = grid::RunStatus::failed;
  failed.result.final_metrics.reset();
  records.push_back(failed);

  const auto groups = aggregate(records, model_dataset_key, Metric::test_dice);
  REQUIRE(groups.size() == 4);
  CHECK(groups.at("B0/160").n_runs == 3);
  CHECK(groups.at("R50/800").median == doctest::Approx(0.1));
  CHECK(metric_from_string("bce") == Metric::test_loss);
  CHECK(metric_from_string("dice") == Metric::test_dice);
  CHECK_THROWS(metric_from_string("accuracy"));
}
