#pragma once

// Mean-zero Gaussian random fields with covariance prefactor * (-lap + shift)^(-alpha).

#include <span>

#include "mno/core/rng.hpp"
#include "mno/spectral/field.hpp"

namespace mno::systems {

struct GrfSpec {
    int dimension = 1;
    double alpha = 2.0;
    double shift = 0.0;  // tau^2 / L^2 for the KS measure, 49 for the NS one
    double prefactor = 1.0;
    double domain_length = 1.0;

    /// L^(-2/alpha) tau^((2 alpha - 1)/2) (-lap + tau^2/L^2)^(-alpha) on [0, L).
    static GrfSpec ks(double domain_length, double alpha = 2.0, double tau = 7.0);
    /// 7^(3/2) (-lap + 49)^(-2.5) on [0, 2 pi)^2.
    static GrfSpec navier_stokes();

    /// Covariance eigenvalue at squared physical wavenumber k2.
    double eigenvalue(double k2) const;
    void validate() const;
};

/// Expected |f_hat|^2 of each stored coefficient (0 on the mean and Nyquist modes).
std::vector<double> grf_variances(const GrfSpec& spec, std::size_t resolution);

/// Draws coefficients f_hat = sqrt(lambda) (a + i b) / sqrt(2), a, b ~ N(0, 1), Hermitian-consistent;
/// the mean and Nyquist modes are zero.
spectral::SpectralField grf_sample_hat(const GrfSpec& spec, std::size_t resolution, Rng& rng);

spectral::GridField grf_sample(const GrfSpec& spec, std::size_t resolution, Rng& rng);

}  // namespace mno::systems
