#include <doctest.h>

#include <array>
#include <cmath>
#include <cstring>

#include "capax/metrics/kernels.hpp"
#include "capax/util/rng.hpp"

using namespace capax;
using namespace capax::metrics;

namespace {

// Lengths that exercise the vector body, the tail and the empty body.
constexpr std::size_t kLengths[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 65, 1000, 4099};

}  // namespace

TEST_CASE("scalar kernels are always present") {
  CHECK(scalar_kernels().name == "scalar");
  CHECK(!active_kernels().name.empty());
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* avx2 = avx2_kernels();
  if (avx2 == nullptr || !cpu_supports_avx2()) {
    MESSAGE("AVX2 not available; equivalence check skipped");
    return;
  }
  const KernelTable& ref = scalar_kernels();
  Rng rng(2718);
  for (std::size_t n : kLengths)
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::uint8_t> y(n);
      std::vector<double> p(n);
      std::vector<float> f(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<std::uint8_t>(rng.below(2));
        const auto pick = rng.below(12);
        p[i] = pick == 0 ? 0.5 : pick == 1 ? 0.0 : pick == 2 ? 1.0 : pick == 3 ? std::nextafter(0.5, 0.0)
                                                                                 : rng.uniform();
        f[i] = static_cast<float>(rng.normal() * 100.0);
      }
      CAPTURE(n);
      CHECK(avx2->confusion(y, p) == ref.confusion(y, p));
      for (double eps : {1e-7, 1e-3}) {
        const double a = avx2->nll_sum(y, p, eps);
        const double b = ref.nll_sum(y, p, eps);
        CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b)));
      }
      CHECK(avx2->minmax(f) == ref.minmax(f));
    }
}

TEST_CASE("avx2 log stays within a few ulp of std::log") {
  const KernelTable* avx2 = avx2_kernels();
  if (avx2 == nullptr || !cpu_supports_avx2()) return;
  Rng rng(31);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    // one pixel with label 1: nll = -log(p)
    const double p = std::max(1e-12, rng.uniform());
    const std::array<std::uint8_t, 4> y{1, 1, 1, 1};
    const std::array<double, 4> probs{p, p, p, p};
    const double got = avx2->nll_sum(y, probs, 1e-12) / 4.0;
    const double want = -std::log(p);
    if (want > 0) worst = std::max(worst, std::abs(got - want) / want);
  }
  CHECK(worst < 4e-16);
}
