#pragma once

// 2D vorticity equation on [0, 2 pi)^2:
//   w_t + u . grad w = (1/Re) lap w + g,   g = -n cos(n y)
// Exact integrating factor for viscosity, Heun for advection and forcing.

#include <vector>

#include "mno/spectral/field.hpp"

namespace mno::systems {

using spectral::cplx;

struct NsOperator {
    StateShape shape;
    double dt = 0.0;
    double reynolds = 1.0;
    int forcing_wavenumber = 4;
    bool forcing = true;
    std::vector<double> integrating_factor;  // exp(-|kappa|^2 dt / Re)
    std::vector<double> kx, ky;              // Nyquist entries zeroed
    std::vector<double> inv_k2;              // 1 / |kappa|^2, 0 at the mean mode
    std::vector<unsigned char> mask;         // 2/3 rule
    std::vector<cplx> forcing_hat;
};

NsOperator ns_prepare(std::size_t resolution, double dt, double reynolds, int forcing_wavenumber = 4,
                      bool forcing = true);

/// Largest advective CFL number max(|u| + |v|) dt / dx of the given vorticity.
double ns_cfl(const std::vector<cplx>& w_hat, const NsOperator& op);

/// One split step in place. Throws NumericalError on non-finite output.
void ns_step(std::vector<cplx>& w_hat, const NsOperator& op);

spectral::SpectralField ns_step(const spectral::SpectralField& w_hat, const NsOperator& op);

}  // namespace mno::systems
