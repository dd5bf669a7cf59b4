#pragma once

#include <complex>
#include <vector>

#include "mno/core/state.hpp"
#include "mno/spectral/fft.hpp"

namespace mno::spectral {

/// Real periodic field on its grid.
struct GridField {
    StateShape shape;
    std::vector<double> values;

    GridField() = default;
    explicit GridField(const StateShape& s) : shape(s), values(s.size(), 0.0) {}
    GridField(const StateShape& s, std::vector<double> v);
};

/// Half-spectrum coefficients of a real field.
struct SpectralField {
    StateShape shape;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    explicit SpectralField(const StateShape& s) : shape(s), coeffs(spectral_size(s)) {}
    SpectralField(const StateShape& s, std::vector<cplx> c);
};

SpectralField transform_forward(const GridField& f);
GridField transform_inverse(const SpectralField& f_hat);

/// Signed integer mode numbers of a stored coefficient. ny is 0 for 1D; the Nyquist
/// row of a 2D grid is reported as -N/2.
struct Mode {
    long nx;
    long ny;
};

Mode mode_at(const StateShape& shape, std::size_t index);

/// 2 pi / L.
double wavenumber_unit(const StateShape& shape);

/// |kappa|^2 of a stored coefficient, with physical wavenumbers kappa = 2 pi n / L.
double kappa_squared(const StateShape& shape, std::size_t index);

/// How many full-spectrum coefficients a stored one stands for (1 on the kx = 0 and
/// kx = N/2 columns, 2 elsewhere), so that full sums are sum_stored multiplicity * term.
double multiplicity(const StateShape& shape, std::size_t index);

/// True if any axis sits on the Nyquist mode.
bool is_nyquist(const StateShape& shape, std::size_t index);

/// 2/3-rule mask: keeps modes with |n| < N/3 on every axis.
std::vector<unsigned char> dealias_mask(const StateShape& shape);

/// Multiplies mode n by (i kappa_axis)^order. Odd orders zero the Nyquist mode of that axis.
/// axis 0 is x, axis 1 is y.
SpectralField spectral_derivative(const SpectralField& f_hat, int order, int axis = 0);

/// Grid-space derivative through the spectral route.
GridField derivative(const GridField& f, int order, int axis = 0);

}  // namespace mno::spectral
