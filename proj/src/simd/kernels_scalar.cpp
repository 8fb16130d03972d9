#include "semilin/simd/kernels.hpp"

namespace semilin::simd::scalar {

void ring_matvec(const double* A, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* a = A + i * cols;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      re += a[j] * x[j].real();
      im += a[j] * x[j].imag();
    }
    y[i] = {re, im};
  }
}

void poisson_sum(std::size_t n_targets, const double* x, const double* y, std::size_t m,
                 const double* cos_t, const double* sin_t, const double* phi, double* out) {
  for (std::size_t t = 0; t < n_targets; ++t) {
    const double r2 = x[t] * x[t] + y[t] * y[t];
    const double num = 1.0 - r2;
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double den = 1.0 + r2 - 2.0 * (x[t] * cos_t[j] + y[t] * sin_t[j]);
      s += phi[j] * num / den;
    }
    out[t] = s / static_cast<double>(m);
  }
}

void complex_mul_add(std::size_t n, const cplx* a, const cplx* b, const cplx* c, cplx* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    const double im = a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    out[i] = c ? cplx(re + c[i].real(), im + c[i].imag()) : cplx(re, im);
  }
}

}  // namespace semilin::simd::scalar
