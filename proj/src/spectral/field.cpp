#include "mno/spectral/field.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"

namespace mno::spectral {

GridField::GridField(const StateShape& s, std::vector<double> v) : shape(s), values(std::move(v)) {
    require(values.size() == shape.size(), "grid field: value count does not match shape");
}

SpectralField::SpectralField(const StateShape& s, std::vector<cplx> c) : shape(s), coeffs(std::move(c)) {
    require(coeffs.size() == spectral_size(shape), "spectral field: coefficient count does not match shape");
}

SpectralField transform_forward(const GridField& f) {
    SpectralField out(f.shape);
    forward(f.shape, f.values, out.coeffs);
    return out;
}

GridField transform_inverse(const SpectralField& f_hat) {
    GridField out(f_hat.shape);
    inverse(f_hat.shape, f_hat.coeffs, out.values);
    return out;
}

Mode mode_at(const StateShape& shape, std::size_t index) {
    const long n = static_cast<long>(shape.n);
    if (shape.dimension() == 1) return {static_cast<long>(index), 0};
    const std::size_t half = shape.n / 2 + 1;
    const long iy = static_cast<long>(index / half);
    const long ix = static_cast<long>(index % half);
    return {ix, iy < n / 2 ? iy : iy - n};
}

double wavenumber_unit(const StateShape& shape) { return 2.0 * std::numbers::pi / shape.domain_length; }

double kappa_squared(const StateShape& shape, std::size_t index) {
    const Mode m = mode_at(shape, index);
    const double u = wavenumber_unit(shape);
    const double kx = u * static_cast<double>(m.nx);
    const double ky = u * static_cast<double>(m.ny);
    return kx * kx + ky * ky;
}

double multiplicity(const StateShape& shape, std::size_t index) {
    const long nx = mode_at(shape, index).nx;
    return (nx == 0 || nx == static_cast<long>(shape.n / 2)) ? 1.0 : 2.0;
}

bool is_nyquist(const StateShape& shape, std::size_t index) {
    const Mode m = mode_at(shape, index);
    const long ny = static_cast<long>(shape.n / 2);
    return m.nx == ny || (shape.dimension() == 2 && m.ny == -ny);
}

std::vector<unsigned char> dealias_mask(const StateShape& shape) {
    const std::size_t count = spectral_size(shape);
    std::vector<unsigned char> mask(count);
    const double cut = static_cast<double>(shape.n) / 3.0;
    for (std::size_t s = 0; s < count; ++s) {
        const Mode m = mode_at(shape, s);
        mask[s] = std::abs(static_cast<double>(m.nx)) < cut && std::abs(static_cast<double>(m.ny)) < cut;
    }
    return mask;
}

SpectralField spectral_derivative(const SpectralField& f_hat, int order, int axis) {
    require(order >= 0, "derivative order must be non-negative");
    require(axis == 0 || (axis == 1 && f_hat.shape.dimension() == 2), "derivative axis out of range");
    SpectralField out = f_hat;
    const double unit = wavenumber_unit(f_hat.shape);
    const long nyq = static_cast<long>(f_hat.shape.n / 2);
    for (std::size_t s = 0; s < out.coeffs.size(); ++s) {
        const Mode m = mode_at(f_hat.shape, s);
        const long n = axis == 0 ? m.nx : m.ny;
        if (order % 2 == 1 && std::abs(n) == nyq) {
            out.coeffs[s] = 0.0;
            continue;
        }
        const double k = unit * static_cast<double>(n);
        // (i k)^order = k^order * i^order
        cplx factor = std::pow(k, order);
        switch (order % 4) {
        case 1: factor *= cplx(0, 1); break;
        case 2: factor = -factor; break;
        case 3: factor *= cplx(0, -1); break;
        default: break;
        }
        out.coeffs[s] *= factor;
    }
    return out;
}

GridField derivative(const GridField& f, int order, int axis) {
    return transform_inverse(spectral_derivative(transform_forward(f), order, axis));
}

}  // namespace mno::spectral
