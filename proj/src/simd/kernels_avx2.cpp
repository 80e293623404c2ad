// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "mflab/simd/kernels.hpp"

namespace mflab::simd {

namespace {

// Cephes-style exp: x = n ln2 + r, |r| <= ln2/2, e^r from a (2,3) Pade form.
inline __m256d exp_pd(__m256d x) {
  const __m256d hi = _mm256_set1_pd(708.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  const __m256d er = _mm256_add_pd(
      _mm256_set1_pd(1.0),
      _mm256_div_pd(_mm256_add_pd(p, p), _mm256_sub_pd(q, p)));

  // 2^n through the exponent field; n is integral and within [-1022, 1022].
  const __m256d magic = _mm256_set1_pd(6755399441055744.0); // 1.5 * 2^52
  __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                _mm256_castpd_si256(magic));
  ni = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(er, _mm256_castsi256_pd(ni));
}

inline __m256d logistic_pd(__m256d t) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), t));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double logistic_tail(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

SigmoidSums sums_avx2(const double* z, const double* weights, std::size_t n, double shift,
                      double scale) {
  const __m256d vshift = _mm256_set1_pd(shift);
  const __m256d vscale = _mm256_set1_pd(scale);
  __m256d acc_w = _mm256_setzero_pd();
  __m256d acc_p = _mm256_setzero_pd();
  __m256d acc_q = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vscale, _mm256_add_pd(_mm256_loadu_pd(z + i), vshift));
    const __m256d s = logistic_pd(t);
    acc_w = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i), s, acc_w);
    acc_p = _mm256_add_pd(acc_p, s);
    acc_q = _mm256_fmadd_pd(s, s, acc_q);
  }
  SigmoidSums out{hsum(acc_w), hsum(acc_p), hsum(acc_q)};
  for (; i < n; ++i) {
    const double s = logistic_tail(scale * (z[i] + shift));
    out.weighted += weights[i] * s;
    out.plain += s;
    out.squares += s * s;
  }
  return out;
}

void eval_avx2(const double* z, std::size_t n, double shift, double scale, double* value,
               double* d1) {
  const __m256d vshift = _mm256_set1_pd(shift);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vscale, _mm256_add_pd(_mm256_loadu_pd(z + i), vshift));
    const __m256d s = logistic_pd(t);
    _mm256_storeu_pd(value + i, s);
    if (d1 != nullptr) {
      _mm256_storeu_pd(d1 + i, _mm256_mul_pd(vscale, _mm256_mul_pd(s, _mm256_sub_pd(one, s))));
    }
  }
  for (; i < n; ++i) {
    const double s = logistic_tail(scale * (z[i] + shift));
    value[i] = s;
    if (d1 != nullptr) {
      d1[i] = scale * s * (1.0 - s);
    }
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

constexpr KernelTable kAvx2{Backend::Avx2, &sums_avx2, &eval_avx2, &dot_avx2};

} // namespace

const KernelTable* avx2_table_impl() { return &kAvx2; }

} // namespace mflab::simd
