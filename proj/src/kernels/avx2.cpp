#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "gazecal/kernels/kernels.hpp"

namespace gazecal::kernels {

namespace {

constexpr double kSqrt1_2 = 0.7071067811865476;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

// exp(x) for doubles, Cephes-style: reduce by powers of two, rational
// approximation on the remainder, rescale. Relative error ~7e-15 on
// [-708, 709]; arguments below -708.4 flush to zero (this kernel only ever
// sees exp(-x*x), so the deep-subnormal range is irrelevant).
inline __m256d vec_exp(__m256d x) {
  const __m256d kLog2E = splat(1.4426950408889634073599);
  const __m256d kC1 = splat(6.93145751953125e-1);
  const __m256d kC2 = splat(1.42860682030941723212e-6);
  const __m256d kP0 = splat(1.26177193074810590878e-4);
  const __m256d kP1 = splat(3.02994407707441961300e-2);
  const __m256d kP2 = splat(9.99999999999999999910e-1);
  const __m256d kQ0 = splat(3.00198505138664455042e-6);
  const __m256d kQ1 = splat(2.52448340349684104192e-3);
  const __m256d kQ2 = splat(2.27265548208155028766e-1);
  const __m256d kQ3 = splat(2.00000000000000000005e0);

  const __m256d live = _mm256_cmp_pd(x, splat(-708.4), _CMP_GT_OQ);
  x = _mm256_min_pd(x, splat(709.78));
  x = _mm256_max_pd(x, splat(-708.4));

  const __m256d n = _mm256_floor_pd(
      _mm256_add_pd(_mm256_mul_pd(kLog2E, x), splat(0.5)));
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, kC1));
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, kC2));

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_add_pd(_mm256_mul_pd(kP0, xx), kP1);
  px = _mm256_add_pd(_mm256_mul_pd(px, xx), kP2);
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_add_pd(_mm256_mul_pd(kQ0, xx), kQ1);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, xx), kQ2);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, xx), kQ3);
  const __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  __m256d r = _mm256_add_pd(splat(1.0), _mm256_add_pd(e, e));

  // r *= 2^n, n in [-1022, 1024] after the clamps above.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(bits));
  return _mm256_and_pd(r, live);
}

// erfc(x), W. J. Cody's rational Chebyshev approximation (three regions,
// blended branchlessly). Max absolute error ~2e-16 against a 50-digit
// reference on [-6, 6].
inline __m256d vec_erfc(__m256d x) {
  const __m256d ax = _mm256_andnot_pd(splat(-0.0), x);
  const __m256d neg = _mm256_cmp_pd(x, splat(0.0), _CMP_LT_OQ);

  // |x| <= 0.46875: erfc = 1 - x * P(x^2) / Q(x^2)
  static constexpr double A[5] = {3.16112374387056560e00, 1.13864154151050156e02,
                                  3.77485237685302021e02, 3.20937758913846947e03,
                                  1.85777706184603153e-1};
  static constexpr double B[4] = {2.36012909523441209e01, 2.44024637934444173e02,
                                  1.28261652607737228e03, 2.84423683343917062e03};
  const __m256d y = _mm256_mul_pd(ax, ax);
  __m256d num = _mm256_mul_pd(splat(A[4]), y);
  __m256d den = y;
  for (int i = 0; i < 3; ++i) {
    num = _mm256_mul_pd(_mm256_add_pd(num, splat(A[i])), y);
    den = _mm256_mul_pd(_mm256_add_pd(den, splat(B[i])), y);
  }
  const __m256d erf_small = _mm256_div_pd(
      _mm256_mul_pd(x, _mm256_add_pd(num, splat(A[3]))), _mm256_add_pd(den, splat(B[3])));
  const __m256d r_small = _mm256_sub_pd(splat(1.0), erf_small);

  // 0.46875 < |x| <= 4: erfc = exp(-x^2) * P(|x|) / Q(|x|)
  static constexpr double C[9] = {5.64188496988670089e-1, 8.88314979438837594e00,
                                  6.61191906371416295e01, 2.98635138197400131e02,
                                  8.81952221241769090e02, 1.71204761263407058e03,
                                  2.05107837782607147e03, 1.23033935479799725e03,
                                  2.15311535474403846e-8};
  static constexpr double D[8] = {1.57449261107098347e01, 1.17693950891312499e02,
                                  5.37181101862009858e02, 1.62138957456669019e03,
                                  3.29079923573345963e03, 4.36261909014324716e03,
                                  3.43936767414372164e03, 1.23033935480374942e03};
  __m256d num2 = _mm256_mul_pd(splat(C[8]), ax);
  __m256d den2 = ax;
  for (int i = 0; i < 7; ++i) {
    num2 = _mm256_mul_pd(_mm256_add_pd(num2, splat(C[i])), ax);
    den2 = _mm256_mul_pd(_mm256_add_pd(den2, splat(D[i])), ax);
  }
  const __m256d expnxx = vec_exp(_mm256_sub_pd(splat(0.0), _mm256_mul_pd(ax, ax)));
  const __m256d r_mid = _mm256_mul_pd(
      expnxx, _mm256_div_pd(_mm256_add_pd(num2, splat(C[7])), _mm256_add_pd(den2, splat(D[7]))));

  // |x| > 4: erfc = exp(-x^2)/|x| * (1/sqrt(pi) - y * P(y)/Q(y)), y = 1/x^2
  static constexpr double P[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                                  1.25781726111229246e-1, 1.60837851487422766e-2,
                                  6.58749161529837803e-4, 1.63153871373020978e-2};
  static constexpr double Q[5] = {2.56852019228982242e00, 1.87295284992346047e00,
                                  5.27905102951428412e-1, 6.05183413124413191e-2,
                                  2.33520497626869185e-3};
  const __m256d yi = _mm256_div_pd(splat(1.0), _mm256_mul_pd(ax, ax));
  __m256d num3 = _mm256_mul_pd(splat(P[5]), yi);
  __m256d den3 = yi;
  for (int i = 0; i < 4; ++i) {
    num3 = _mm256_mul_pd(_mm256_add_pd(num3, splat(P[i])), yi);
    den3 = _mm256_mul_pd(_mm256_add_pd(den3, splat(Q[i])), yi);
  }
  const __m256d frac = _mm256_mul_pd(
      yi, _mm256_div_pd(_mm256_add_pd(num3, splat(P[4])), _mm256_add_pd(den3, splat(Q[4]))));
  __m256d r_far = _mm256_div_pd(_mm256_sub_pd(splat(0.5641895835477563), frac), ax);
  r_far = _mm256_mul_pd(r_far, expnxx);

  const __m256d in_small = _mm256_cmp_pd(ax, splat(0.46875), _CMP_LE_OQ);
  const __m256d in_mid = _mm256_cmp_pd(ax, splat(4.0), _CMP_LE_OQ);
  __m256d r_pos = _mm256_blendv_pd(r_far, r_mid, in_mid);
  // Mirror for negative arguments in the outer regions; the small region's
  // erf form is odd and already sign-correct.
  r_pos = _mm256_blendv_pd(r_pos, _mm256_sub_pd(splat(2.0), r_pos), neg);
  return _mm256_blendv_pd(r_pos, r_small, in_small);
}

void scale_add_avx2(const double* base, const double* delta, double scale, double* out,
                    std::size_t n) {
  const __m256d vs = splat(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d b = _mm256_loadu_pd(base + i);
    const __m256d d = _mm256_loadu_pd(delta + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(b, _mm256_mul_pd(vs, d)));
  }
  for (; i < n; ++i) out[i] = base[i] + scale * delta[i];
}

void normal_pit_avx2(const double* x, const double* mean, const double* sigma, double* out,
                     std::size_t n) {
  const __m256d kNegSqrt1_2 = splat(-kSqrt1_2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_div_pd(
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i)),
        _mm256_loadu_pd(sigma + i));
    const __m256d phi =
        _mm256_mul_pd(splat(0.5), vec_erfc(_mm256_mul_pd(z, kNegSqrt1_2)));
    _mm256_storeu_pd(out + i, phi);
  }
  for (; i < n; ++i) {
    const double z = (x[i] - mean[i]) / sigma[i];
    out[i] = 0.5 * std::erfc(-z * kSqrt1_2);
  }
}

std::size_t count_leq_avx2(const double* a, const double* bound_a, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m =
        _mm256_cmp_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(bound_a + i), _CMP_LE_OQ);
    count += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(m)));
  }
  for (; i < n; ++i) count += a[i] <= bound_a[i];
  return count;
}

std::size_t count_joint_leq_avx2(const double* a, const double* bound_a, const double* b,
                                 const double* bound_b, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ma =
        _mm256_cmp_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(bound_a + i), _CMP_LE_OQ);
    const __m256d mb =
        _mm256_cmp_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(bound_b + i), _CMP_LE_OQ);
    count += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_pd(_mm256_and_pd(ma, mb))));
  }
  for (; i < n; ++i) count += (a[i] <= bound_a[i]) & (b[i] <= bound_b[i]);
  return count;
}

std::size_t count_joint_within_avx2(const double* a, const double* lo_a, const double* hi_a,
                                    const double* b, const double* lo_b, const double* hi_b,
                                    std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d in_a = _mm256_and_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(lo_a + i), va, _CMP_LE_OQ),
        _mm256_cmp_pd(va, _mm256_loadu_pd(hi_a + i), _CMP_LE_OQ));
    const __m256d in_b = _mm256_and_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(lo_b + i), vb, _CMP_LE_OQ),
        _mm256_cmp_pd(vb, _mm256_loadu_pd(hi_b + i), _CMP_LE_OQ));
    count += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_pd(_mm256_and_pd(in_a, in_b))));
  }
  for (; i < n; ++i) {
    count += (lo_a[i] <= a[i]) & (a[i] <= hi_a[i]) & (lo_b[i] <= b[i]) & (b[i] <= hi_b[i]);
  }
  return count;
}

double sum_diff_avx2(const double* hi, const double* lo, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
  for (; i < n; ++i) sum += hi[i] - lo[i];
  return sum;
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend{
      "avx2",         scale_add_avx2,       normal_pit_avx2,
      count_leq_avx2, count_joint_leq_avx2, count_joint_within_avx2,
      sum_diff_avx2,
  };
  return backend;
}

}  // namespace gazecal::kernels

#endif  // x86_64
