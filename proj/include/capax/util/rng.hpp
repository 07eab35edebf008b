#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace capax {

// Portable seeded generator. std::mt19937_64 output is fixed by the standard,
// but the std distributions are not, so bounded ints and normals are derived
// here to keep plans and synthetic runs byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal deviate (Box-Muller, one value per call).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a seed with a stream label so independent streams do not overlap.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace capax
