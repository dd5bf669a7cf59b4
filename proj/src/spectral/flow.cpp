#include "mno/spectral/flow.hpp"

#include <cmath>

#include "mno/core/error.hpp"

namespace mno::spectral {
namespace {

void require_2d(const StateShape& shape) { require(shape.kind == StateKind::field2d, "flow ops need a 2D field"); }

void require_mean_zero(const SpectralField& w_hat, const GridField& w) {
    const double rms = state_norm(w.shape, w.values);
    if (std::abs(w_hat.coeffs[0]) > 1e-10 * std::max(1.0, rms))
        throw ValidationError("vorticity must have zero mean for the Poisson solve (mean = " +
                              std::to_string(w_hat.coeffs[0].real()) + ")");
}

}  // namespace

void streamfunction_hat(const StateShape& shape, std::span<const cplx> w_hat, std::span<cplx> psi_hat) {
    for (std::size_t s = 0; s < w_hat.size(); ++s) {
        const double k2 = kappa_squared(shape, s);
        psi_hat[s] = k2 > 0.0 ? w_hat[s] / k2 : cplx(0.0);
    }
}

void velocity_hat(const StateShape& shape, std::span<const cplx> w_hat, std::span<cplx> u_hat,
                  std::span<cplx> v_hat) {
    const double unit = wavenumber_unit(shape);
    const long nyq = static_cast<long>(shape.n / 2);
    for (std::size_t s = 0; s < w_hat.size(); ++s) {
        const double k2 = kappa_squared(shape, s);
        const Mode m = mode_at(shape, s);
        const cplx psi = k2 > 0.0 ? w_hat[s] / k2 : cplx(0.0);
        const double ky = std::abs(m.ny) == nyq ? 0.0 : unit * static_cast<double>(m.ny);
        const double kx = m.nx == nyq ? 0.0 : unit * static_cast<double>(m.nx);
        u_hat[s] = cplx(0.0, ky) * psi;
        v_hat[s] = cplx(0.0, -kx) * psi;
    }
}

GridField streamfunction(const GridField& w) {
    require_2d(w.shape);
    const SpectralField w_hat = transform_forward(w);
    require_mean_zero(w_hat, w);
    SpectralField psi(w.shape);
    streamfunction_hat(w.shape, w_hat.coeffs, psi.coeffs);
    return transform_inverse(psi);
}

Velocity vorticity_to_velocity(const GridField& w) {
    require_2d(w.shape);
    const SpectralField w_hat = transform_forward(w);
    require_mean_zero(w_hat, w);
    SpectralField u(w.shape), v(w.shape);
    velocity_hat(w.shape, w_hat.coeffs, u.coeffs, v.coeffs);
    return {transform_inverse(u), transform_inverse(v)};
}

GridField velocity_to_streamfunction(const Velocity& vel) { return streamfunction(curl(vel)); }

GridField curl(const Velocity& vel) {
    require_2d(vel.u.shape);
    const SpectralField dv = spectral_derivative(transform_forward(vel.v), 1, 0);
    const SpectralField du = spectral_derivative(transform_forward(vel.u), 1, 1);
    SpectralField out(vel.u.shape);
    for (std::size_t s = 0; s < out.coeffs.size(); ++s) out.coeffs[s] = dv.coeffs[s] - du.coeffs[s];
    return transform_inverse(out);
}

GridField divergence(const Velocity& vel) {
    require_2d(vel.u.shape);
    const SpectralField du = spectral_derivative(transform_forward(vel.u), 1, 0);
    const SpectralField dv = spectral_derivative(transform_forward(vel.v), 1, 1);
    SpectralField out(vel.u.shape);
    for (std::size_t s = 0; s < out.coeffs.size(); ++s) out.coeffs[s] = du.coeffs[s] + dv.coeffs[s];
    return transform_inverse(out);
}

}  // namespace mno::spectral
