// Compiled with -mavx2 only; callers reach it through avx2_kernels() after a
// CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "capax/metrics/kernels.hpp"

namespace capax::metrics {

namespace detail {
const KernelTable* avx2_table();
}

namespace {

// 4-bit mask of nonzero bytes among labels[0..3].
inline unsigned label_mask4(const std::uint8_t* labels) {
  std::uint32_t word;
  std::memcpy(&word, labels, sizeof word);
  const __m128i bytes = _mm_cvtsi32_si128(static_cast<int>(word));
  const __m128i zero = _mm_cmpeq_epi8(bytes, _mm_setzero_si128());
  return ~static_cast<unsigned>(_mm_movemask_epi8(zero)) & 0xFu;
}

ConfusionCounts confusion_avx2(std::span<const std::uint8_t> labels, std::span<const double> probs) {
  const std::size_t n = labels.size();
  const __m256d half = _mm256_set1_pd(0.5);
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const unsigned pred = static_cast<unsigned>(
        _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(probs.data() + i), half, _CMP_GE_OQ)));
    const unsigned truth = label_mask4(labels.data() + i);
    tp += static_cast<unsigned>(std::popcount(pred & truth));
    fp += static_cast<unsigned>(std::popcount(pred & ~truth & 0xFu));
    fn += static_cast<unsigned>(std::popcount(~pred & truth & 0xFu));
  }
  for (; i < n; ++i) {
    const bool truth = labels[i] != 0;
    const bool pred = probs[i] >= 0.5;
    tp += truth && pred;
    fp += !truth && pred;
    fn += truth && !pred;
  }
  return {tp, fp, fn, n - tp - fp - fn};
}

// Natural log of four positive normal doubles, fdlibm reduction and
// polynomial (< 1 ulp).
inline __m256d log4(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256i bits = _mm256_castpd_si256(x);

  // biased exponent as a double via the 2^52 trick
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d biased = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 52), magic)),
                                       _mm256_set1_pd(4503599627370496.0 + 1023.0));
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.41421356237309504880), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, half), big);
  const __m256d k = _mm256_add_pd(biased, _mm256_and_pd(big, one));

  const __m256d f = _mm256_sub_pd(m, one);
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);
  auto madd = [](__m256d a, __m256d b, __m256d c) { return _mm256_add_pd(_mm256_mul_pd(a, b), c); };
  const __m256d t1 = _mm256_mul_pd(
      w, madd(w, madd(w, _mm256_set1_pd(1.531383769920937332e-01), _mm256_set1_pd(2.222219843214978396e-01)),
              _mm256_set1_pd(3.999999999940941908e-01)));
  const __m256d t2 = _mm256_mul_pd(
      z, madd(w,
              madd(w, madd(w, _mm256_set1_pd(1.479819860511658591e-01), _mm256_set1_pd(1.818357216161805012e-01)),
                   _mm256_set1_pd(2.857142874366239149e-01)),
              _mm256_set1_pd(6.666666666666735130e-01)));
  const __m256d r = _mm256_add_pd(t2, t1);
  const __m256d hfsq = _mm256_mul_pd(half, _mm256_mul_pd(f, f));
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  // k*ln2_hi - ((hfsq - (s*(hfsq+R) + k*ln2_lo)) - f)
  const __m256d inner = _mm256_add_pd(_mm256_mul_pd(s, _mm256_add_pd(hfsq, r)), _mm256_mul_pd(k, ln2_lo));
  return _mm256_sub_pd(_mm256_mul_pd(k, ln2_hi), _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));
}

double nll_sum_avx2(std::span<const std::uint8_t> labels, std::span<const double> probs, double eps) {
  const std::size_t n = labels.size();
  const __m256d lo = _mm256_set1_pd(eps);
  const __m256d hi = _mm256_set1_pd(1.0 - eps);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(probs.data() + i);
    std::uint32_t word;
    std::memcpy(&word, labels.data() + i, sizeof word);
    const __m256i widened = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(word)));
    const __m256i truth = _mm256_cmpgt_epi64(widened, _mm256_setzero_si256());
    const __m256d chosen = _mm256_blendv_pd(_mm256_sub_pd(one, p), p, _mm256_castsi256_pd(truth));
    acc = _mm256_sub_pd(acc, log4(_mm256_min_pd(_mm256_max_pd(chosen, lo), hi)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double q = labels[i] != 0 ? probs[i] : 1.0 - probs[i];
    sum -= std::log(std::clamp(q, eps, 1.0 - eps));
  }
  return sum;
}

std::pair<float, float> minmax_avx2(std::span<const float> values) {
  const std::size_t n = values.size();
  float lo = values[0];
  float hi = values[0];
  std::size_t i = 0;
  if (n >= 8) {
    __m256 vlo = _mm256_loadu_ps(values.data());
    __m256 vhi = vlo;
    for (i = 8; i + 8 <= n; i += 8) {
      const __m256 v = _mm256_loadu_ps(values.data() + i);
      vlo = _mm256_min_ps(vlo, v);
      vhi = _mm256_max_ps(vhi, v);
    }
    alignas(32) float a[8], b[8];
    _mm256_store_ps(a, vlo);
    _mm256_store_ps(b, vhi);
    lo = *std::min_element(a, a + 8);
    hi = *std::max_element(b, b + 8);
  }
  for (; i < n; ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  return {lo, hi};
}

}  // namespace

namespace detail {
const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", &confusion_avx2, &nll_sum_avx2, &minmax_avx2};
  return &table;
}
}  // namespace detail

}  // namespace capax::metrics
