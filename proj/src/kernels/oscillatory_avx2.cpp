// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "decoup/kernels.hpp"

#include "expi_poly.hpp"

#include <immintrin.h>

namespace decoup::kernels {

namespace {

inline void expi_turns_avx2(__m256d t, __m256d& re, __m256d& im) {
  constexpr int kRound = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;
  const __m256d r = _mm256_sub_pd(t, _mm256_round_pd(t, kRound));
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(_mm256_set1_pd(4.0), r), kRound);
  const __m256d s = _mm256_fmadd_pd(_mm256_set1_pd(-0.25), q, r);
  const __m256d x = _mm256_mul_pd(_mm256_set1_pd(detail::kTwoPi), s);
  const __m256d x2 = _mm256_mul_pd(x, x);
  __m256d ps = _mm256_set1_pd(detail::kSinCoef[detail::kTerms - 1]);
  __m256d pc = _mm256_set1_pd(detail::kCosCoef[detail::kTerms - 1]);
  for (int k = detail::kTerms - 2; k >= 0; --k) {
    ps = _mm256_fmadd_pd(ps, x2, _mm256_set1_pd(detail::kSinCoef[k]));
    pc = _mm256_fmadd_pd(pc, x2, _mm256_set1_pd(detail::kCosCoef[k]));
  }
  const __m256d sn = _mm256_mul_pd(ps, x);
  const __m256d cs = pc;
  const __m256d aq = _mm256_andnot_pd(_mm256_set1_pd(-0.0), q);
  const __m256d f = _mm256_sub_pd(_mm256_set1_pd(1.0), aq);
  const __m256d odd = _mm256_cmp_pd(aq, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d neg_q = _mm256_xor_pd(q, _mm256_set1_pd(-0.0));
  re = _mm256_blendv_pd(_mm256_mul_pd(f, cs), _mm256_mul_pd(neg_q, sn), odd);
  im = _mm256_blendv_pd(_mm256_mul_pd(f, sn), _mm256_mul_pd(q, cs), odd);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

std::complex<double> oscillatory_sum_avx2(const OscillatorySum& s, std::span<const double> x) {
  const int d = s.num_axes;
  __m256d xv[kMaxAxes];
  for (int a = 0; a < d; ++a) xv[a] = _mm256_set1_pd(x[static_cast<std::size_t>(a)]);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= s.count; j += 4) {
    __m256d t = _mm256_mul_pd(xv[0], _mm256_loadu_pd(s.axes[0] + j));
    for (int a = 1; a < d; ++a) t = _mm256_fmadd_pd(xv[a], _mm256_loadu_pd(s.axes[a] + j), t);
    __m256d co;
    __m256d si;
    expi_turns_avx2(t, co, si);
    const __m256d cr = _mm256_loadu_pd(s.c_re + j);
    if (s.c_im) {
      const __m256d ci = _mm256_loadu_pd(s.c_im + j);
      acc_re = _mm256_fmadd_pd(cr, co, acc_re);
      acc_re = _mm256_fnmadd_pd(ci, si, acc_re);
      acc_im = _mm256_fmadd_pd(cr, si, acc_im);
      acc_im = _mm256_fmadd_pd(ci, co, acc_im);
    } else {
      acc_re = _mm256_fmadd_pd(cr, co, acc_re);
      acc_im = _mm256_fmadd_pd(cr, si, acc_im);
    }
  }
  double re = hsum(acc_re);
  double im = hsum(acc_im);
  for (; j < s.count; ++j) {
    double t = x[0] * s.axes[0][j];
    for (int a = 1; a < d; ++a) t = std::fma(x[static_cast<std::size_t>(a)], s.axes[a][j], t);
    double co = 0.0;
    double si = 0.0;
    detail::expi_turns_scalar_poly(t, co, si);
    const double cr = s.c_re[j];
    const double ci = s.c_im ? s.c_im[j] : 0.0;
    re += cr * co - ci * si;
    im += cr * si + ci * co;
  }
  return {re, im};
}

}  // namespace decoup::kernels
