#include "mno/systems/grf.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"

namespace mno::systems {

GrfSpec GrfSpec::ks(double domain_length, double alpha, double tau) {
    GrfSpec s;
    s.dimension = 1;
    s.alpha = alpha;
    s.shift = tau * tau / (domain_length * domain_length);
    s.prefactor = std::pow(domain_length, -2.0 / alpha) * std::pow(tau, (2.0 * alpha - 1.0) / 2.0);
    s.domain_length = domain_length;
    return s;
}

GrfSpec GrfSpec::navier_stokes() {
    GrfSpec s;
    s.dimension = 2;
    s.alpha = 2.5;
    s.shift = 49.0;
    s.prefactor = std::pow(7.0, 1.5);
    s.domain_length = 2.0 * std::numbers::pi;
    return s;
}

double GrfSpec::eigenvalue(double k2) const { return prefactor * std::pow(k2 + shift, -alpha); }

void GrfSpec::validate() const {
    require(dimension == 1 || dimension == 2, "grf dimension must be 1 or 2");
    require(alpha > 0.0, "grf alpha must be positive");
    require(prefactor > 0.0, "grf prefactor must be positive");
    require(shift >= 0.0, "grf shift must be non-negative");
    require(domain_length > 0.0, "grf domain length must be positive");
}

namespace {

StateShape grf_shape(const GrfSpec& spec, std::size_t resolution) {
    spec.validate();
    require(is_power_of_two(resolution) && resolution >= 4, "grf resolution must be a power of two >= 4");
    return spec.dimension == 2 ? StateShape::field2d(resolution, spec.domain_length)
                               : StateShape::field1d(resolution, spec.domain_length);
}

}  // namespace

std::vector<double> grf_variances(const GrfSpec& spec, std::size_t resolution) {
    const StateShape shape = grf_shape(spec, resolution);
    std::vector<double> var(spectral::spectral_size(shape), 0.0);
    for (std::size_t s = 1; s < var.size(); ++s)
        if (!spectral::is_nyquist(shape, s)) var[s] = spec.eigenvalue(spectral::kappa_squared(shape, s));
    return var;
}

spectral::SpectralField grf_sample_hat(const GrfSpec& spec, std::size_t resolution, Rng& rng) {
    const StateShape shape = grf_shape(spec, resolution);
    const std::vector<double> var = grf_variances(spec, resolution);
    spectral::SpectralField f(shape);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // draws happen for every stored coefficient in storage order, so the stream layout is fixed
    for (std::size_t s = 0; s < f.coeffs.size(); ++s) {
        const double a = standard_normal(rng);
        const double b = standard_normal(rng);
        f.coeffs[s] = std::sqrt(var[s]) * inv_sqrt2 * spectral::cplx(a, b);
    }
    if (shape.dimension() == 2) {
        // kx = 0 column: the lower half is the conjugate of the upper half
        const std::size_t n = shape.n, half = n / 2 + 1;
        for (std::size_t ky = n / 2 + 1; ky < n; ++ky) f.coeffs[ky * half] = std::conj(f.coeffs[(n - ky) * half]);
    }
    return f;
}

spectral::GridField grf_sample(const GrfSpec& spec, std::size_t resolution, Rng& rng) {
    return spectral::transform_inverse(grf_sample_hat(spec, resolution, rng));
}

}  // namespace mno::systems
