#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "incomelab/kernels.hpp"

namespace incomelab::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// Cephes-style exp: x = n ln2 + r, |r| <= ln2/2, rational approximation for
// e^r, then scale by 2^n through the exponent bits.
__m256d exp_pd(__m256d x) {
  const __m256d hi_limit = _mm256_set1_pd(709.78271289338397);
  const __m256d lo_limit = _mm256_set1_pd(-708.39641853226408);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212E-6);

  const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(xc, _mm256_mul_pd(n, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, ln2_lo));

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  // 2^n split in two factors so n = 1024 (x near the overflow limit) works.
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i half = _mm_srai_epi32(ni, 1);
  const __m128i rest = _mm_sub_epi32(ni, half);
  auto pow2 = [](__m128i k) {
    __m256i k64 = _mm256_cvtepi32_epi64(k);
    k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
  };
  e = _mm256_mul_pd(_mm256_mul_pd(e, pow2(half)), pow2(rest));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), overflow);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), underflow);
  return _mm256_blendv_pd(e, x, is_nan);
}

}  // namespace

void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale) {
  const __m256d d = _mm256_set1_pd(drift_dt);
  const __m256d s = _mm256_set1_pd(noise_scale);
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) {
    const __m256d inc = _mm256_add_pd(d, _mm256_mul_pd(s, _mm256_loadu_pd(noise.data() + i)));
    _mm256_storeu_pd(x.data() + i, _mm256_add_pd(_mm256_loadu_pd(x.data() + i), inc));
  }
  scalar::drift_noise_step(x.subspan(i), noise.subspan(i), drift_dt, noise_scale);
}

void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale) {
  const __m256d neg_rate = _mm256_set1_pd(-rate_dt);
  const __m256d s = _mm256_set1_pd(noise_scale);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x.data() + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ), one);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ), one);
    const __m256d sgn = _mm256_sub_pd(pos, neg);
    const __m256d inc = _mm256_add_pd(_mm256_mul_pd(neg_rate, sgn),
                                      _mm256_mul_pd(s, _mm256_loadu_pd(noise.data() + i)));
    _mm256_storeu_pd(x.data() + i, _mm256_add_pd(v, inc));
  }
  scalar::sign_drift_noise_step(x.subspan(i), noise.subspan(i), rate_dt, noise_scale);
}

void reflect_below(std::span<double> x, double floor) {
  const __m256d f = _mm256_set1_pd(floor);
  const __m256d twice = _mm256_set1_pd(floor + floor);
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x.data() + i);
    const __m256d below = _mm256_cmp_pd(v, f, _CMP_LT_OQ);
    _mm256_storeu_pd(x.data() + i, _mm256_blendv_pd(v, _mm256_sub_pd(twice, v), below));
  }
  scalar::reflect_below(x.subspan(i), floor);
}

double sum(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
  return hsum(acc) + scalar::sum(x.subspan(i));
}

double sum_abs(std::span<const double> x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes)
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x.data() + i)));
  return hsum(acc) + scalar::sum_abs(x.subspan(i));
}

double sum_sq(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x.data() + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  return hsum(acc) + scalar::sum_sq(x.subspan(i));
}

void exp_inplace(std::span<double> x) {
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes)
    _mm256_storeu_pd(x.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  scalar::exp_inplace(x.subspan(i));
}

void scale_by_exp(std::span<double> y, std::span<const double> log_factor) {
  std::size_t i = 0;
  for (; i + kLanes <= y.size(); i += kLanes) {
    const __m256d f = exp_pd(_mm256_loadu_pd(log_factor.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_mul_pd(_mm256_loadu_pd(y.data() + i), f));
  }
  scalar::scale_by_exp(y.subspan(i), log_factor.subspan(i));
}

}  // namespace incomelab::kernels::avx2
