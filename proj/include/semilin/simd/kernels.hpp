#pragma once

#include <complex>
#include <cstddef>

namespace semilin::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

// y[i] = sum_j A[i*cols + j] * x[j], A real row-major.
using RingMatvecFn = void (*)(const double* A, std::size_t rows, std::size_t cols,
                              const cplx* x, cplx* y);

// out[t] = (1/m) sum_j P(z_t, e^{i t_j}) phi[j] with z_t = x[t] + i y[t].
using PoissonSumFn = void (*)(std::size_t n_targets, const double* x, const double* y,
                              std::size_t m, const double* cos_t, const double* sin_t,
                              const double* phi, double* out);

// out[i] = a[i] * b[i] + c[i]; c may be null.
using ComplexMulAddFn = void (*)(std::size_t n, const cplx* a, const cplx* b,
                                 const cplx* c, cplx* out);

struct Kernels {
  Isa isa;
  RingMatvecFn ring_matvec;
  PoissonSumFn poisson_sum;
  ComplexMulAddFn complex_mul_add;
};

namespace scalar {
void ring_matvec(const double* A, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void poisson_sum(std::size_t n_targets, const double* x, const double* y, std::size_t m,
                 const double* cos_t, const double* sin_t, const double* phi, double* out);
void complex_mul_add(std::size_t n, const cplx* a, const cplx* b, const cplx* c, cplx* out);
}  // namespace scalar

namespace avx2 {
void ring_matvec(const double* A, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void poisson_sum(std::size_t n_targets, const double* x, const double* y, std::size_t m,
                 const double* cos_t, const double* sin_t, const double* phi, double* out);
void complex_mul_add(std::size_t n, const cplx* a, const cplx* b, const cplx* c, cplx* out);
}  // namespace avx2

bool cpu_has_avx2();

// Active table. First use picks AVX2 when the CPU has it, unless SEMILIN_ISA=scalar.
const Kernels& active();
const Kernels& table(Isa isa);
void select(Isa isa);
const char* isa_name(Isa isa);

}  // namespace semilin::simd
