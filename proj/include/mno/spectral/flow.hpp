#pragma once

// Vorticity / stream function / velocity on [0, 2 pi)^2 with -lap(psi) = w and
// u = (d psi / dy, -d psi / dx).

#include <span>

#include "mno/spectral/field.hpp"

namespace mno::spectral {

struct Velocity {
    GridField u;  // x component
    GridField v;  // y component
};

/// Coefficient-space stream function: psi_hat = w_hat / |kappa|^2, psi_hat(0) = 0.
void streamfunction_hat(const StateShape& shape, std::span<const cplx> w_hat, std::span<cplx> psi_hat);

/// Coefficient-space velocity from vorticity. Nyquist modes of the differentiated axis are zeroed,
/// so curl recovery is exact for vorticity without Nyquist content.
void velocity_hat(const StateShape& shape, std::span<const cplx> w_hat, std::span<cplx> u_hat,
                  std::span<cplx> v_hat);

/// Throws ValidationError unless the field mean is zero to 1e-10 (relative to its RMS when larger than 1).
GridField streamfunction(const GridField& w);
Velocity vorticity_to_velocity(const GridField& w);
GridField velocity_to_streamfunction(const Velocity& vel);

/// dv/dx - du/dy.
GridField curl(const Velocity& vel);
/// du/dx + dv/dy.
GridField divergence(const Velocity& vel);

}  // namespace mno::spectral
