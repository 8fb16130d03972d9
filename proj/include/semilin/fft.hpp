#pragma once

#include <complex>

namespace semilin::fft {

using cplx = std::complex<double>;

// Batched in-place transforms over `howmany` contiguous rows of length n.
// forward: X_k = sum_j x_j e^{-2 pi i jk/n}; backward is unnormalized with e^{+}.
void forward(cplx* data, int n, int howmany = 1);
void backward(cplx* data, int n, int howmany = 1);

// Row-major n0 x n1 arrays.
void forward_2d(cplx* data, int n0, int n1);
void backward_2d(cplx* data, int n0, int n1);

}  // namespace semilin::fft
