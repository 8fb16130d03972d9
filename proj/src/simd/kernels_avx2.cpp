#include "semilin/simd/kernels.hpp"

#include <immintrin.h>

namespace semilin::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void ring_matvec(const double* A, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* a = A + i * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      // (a0,a0,a1,a1) against (x0.re,x0.im,x1.re,x1.im)
      __m256d a01 = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(a + j)), 0x50);
      __m256d a23 = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(a + j + 2)), 0x50);
      acc0 = _mm256_fmadd_pd(a01, _mm256_loadu_pd(xd + 2 * j), acc0);
      acc1 = _mm256_fmadd_pd(a23, _mm256_loadu_pd(xd + 2 * j + 4), acc1);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc0), _mm256_extractf128_pd(acc0, 1));
    double re = _mm_cvtsd_f64(s);
    double im = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
    for (; j < cols; ++j) {
      re += a[j] * x[j].real();
      im += a[j] * x[j].imag();
    }
    y[i] = {re, im};
  }
}

void poisson_sum(std::size_t n_targets, const double* x, const double* y, std::size_t m,
                 const double* cos_t, const double* sin_t, const double* phi, double* out) {
  const __m256d mtwo = _mm256_set1_pd(-2.0);
  for (std::size_t t = 0; t < n_targets; ++t) {
    const double r2 = x[t] * x[t] + y[t] * y[t];
    const double num = 1.0 - r2;
    const __m256d vx = _mm256_set1_pd(x[t]);
    const __m256d vy = _mm256_set1_pd(y[t]);
    const __m256d base = _mm256_set1_pd(1.0 + r2);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
      __m256d dot = _mm256_fmadd_pd(vx, _mm256_loadu_pd(cos_t + j),
                                    _mm256_mul_pd(vy, _mm256_loadu_pd(sin_t + j)));
      __m256d den = _mm256_fmadd_pd(mtwo, dot, base);
      acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(phi + j), den));
    }
    double s = hsum(acc);
    for (; j < m; ++j) {
      const double den = 1.0 + r2 - 2.0 * (x[t] * cos_t[j] + y[t] * sin_t[j]);
      s += phi[j] / den;
    }
    out[t] = s * num / static_cast<double>(m);
  }
}

void complex_mul_add(std::size_t n, const cplx* a, const cplx* b, const cplx* c, cplx* out) {
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  const double* cd = reinterpret_cast<const double*>(c);
  double* od = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(ad + 2 * i);
    __m256d vb = _mm256_loadu_pd(bd + 2 * i);
    __m256d are = _mm256_movedup_pd(va);
    __m256d aim = _mm256_permute_pd(va, 0xF);
    __m256d bsw = _mm256_permute_pd(vb, 0x5);
    __m256d prod = _mm256_fmaddsub_pd(are, vb, _mm256_mul_pd(aim, bsw));
    if (cd) prod = _mm256_add_pd(prod, _mm256_loadu_pd(cd + 2 * i));
    _mm256_storeu_pd(od + 2 * i, prod);
  }
  for (; i < n; ++i) {
    const double re = a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    const double im = a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    out[i] = c ? cplx(re + c[i].real(), im + c[i].imag()) : cplx(re, im);
  }
}

}  // namespace semilin::simd::avx2
