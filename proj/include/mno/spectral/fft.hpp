#pragma once

// Real-to-half-complex transforms on periodic grids.
//
// forward:  f_hat(n) = (1/N^d) sum_x f(x) exp(-i 2 pi n.x / N)
// inverse:  f(x)     = Re sum_n f_hat(n) exp(+i 2 pi n.x / N) over the full spectrum
//
// Half-spectrum storage: 1D holds n = 0..N/2; 2D holds rows ky = 0..N-1 (FFT order) of
// columns kx = 0..N/2, i.e. index ky * (N/2 + 1) + kx. Grids are row-major with x fastest.
// Multi-channel data is channels-last: value (point, c) at point * channels + c.

#include <complex>
#include <cstddef>
#include <span>

#include "mno/core/state.hpp"

namespace mno::spectral {

using cplx = std::complex<double>;

/// Number of stored complex coefficients per channel.
std::size_t spectral_size(const StateShape& shape);

/// Number of grid points per channel (N or N^2).
std::size_t grid_size(const StateShape& shape);

void forward(const StateShape& shape, std::span<const double> in, std::span<cplx> out, std::size_t channels = 1);

/// The inverse only reads the Hermitian-consistent part of the self-conjugate columns
/// (kx = 0 and kx = N/2), so it is the real part of the full inverse sum for any input.
void inverse(const StateShape& shape, std::span<const cplx> in, std::span<double> out, std::size_t channels = 1);

}  // namespace mno::spectral
