#pragma once

// Kuramoto-Sivashinsky u_t = -u u_x - u_xx - u_xxxx on [0, L), ETDRK4 in coefficient space.

#include <vector>

#include "mno/spectral/field.hpp"

namespace mno::systems {

using spectral::cplx;

struct EtdCoefficients {
    StateShape shape;
    double dt = 0.0;
    bool nonlinear = true;
    std::vector<double> ell;  // kappa^2 - kappa^4
    std::vector<double> E, E2, Q, f1, f2, f3;
    std::vector<cplx> g;  // -i kappa / 2, zero outside the 2/3 band
};

/// phi-function coefficients by contour averaging over 32 points of a unit circle around ell*dt.
EtdCoefficients ks_precompute(std::size_t resolution, double domain_length, double dt, bool nonlinear = true);

/// One ETDRK4 step in place. Throws NumericalError on non-finite output.
void ks_etdrk4_step(std::vector<cplx>& u_hat, const EtdCoefficients& c);

spectral::SpectralField ks_etdrk4_step(const spectral::SpectralField& u_hat, const EtdCoefficients& c);

}  // namespace mno::systems
