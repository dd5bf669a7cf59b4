#include "mno/systems/ks.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"

namespace mno::systems {
namespace {

constexpr int kContourPoints = 32;

// N(v) = -1/2 d/dx (v^2), pseudo-spectral with the 2/3 rule
struct Nonlinear {
    const EtdCoefficients& c;
    std::vector<double> grid;
    std::vector<cplx> hat;

    explicit Nonlinear(const EtdCoefficients& c_) : c(c_), grid(c_.shape.n), hat(c_.g.size()) {}

    void operator()(const std::vector<cplx>& v, std::vector<cplx>& out) {
        if (!c.nonlinear) {
            std::fill(out.begin(), out.end(), cplx(0.0));
            return;
        }
        spectral::inverse(c.shape, v, grid);
        for (double& x : grid) x = x * x;
        spectral::forward(c.shape, grid, hat);
        for (std::size_t m = 0; m < out.size(); ++m) out[m] = c.g[m] * hat[m];
    }
};

}  // namespace

EtdCoefficients ks_precompute(std::size_t resolution, double domain_length, double dt, bool nonlinear) {
    require(is_power_of_two(resolution) && resolution >= 4, "KS resolution must be a power of two >= 4");
    require(dt > 0.0, "KS dt must be positive");
    require(domain_length > 0.0, "KS domain length must be positive");

    EtdCoefficients c;
    c.shape = StateShape::field1d(resolution, domain_length);
    c.dt = dt;
    c.nonlinear = nonlinear;
    const std::size_t nm = spectral::spectral_size(c.shape);
    for (auto* v : {&c.ell, &c.E, &c.E2, &c.Q, &c.f1, &c.f2, &c.f3}) v->resize(nm);
    c.g.resize(nm);

    const auto mask = spectral::dealias_mask(c.shape);
    const double unit = spectral::wavenumber_unit(c.shape);
    std::vector<cplx> roots(kContourPoints);
    for (int j = 0; j < kContourPoints; ++j)
        roots[j] = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / kContourPoints);

    for (std::size_t n = 0; n < nm; ++n) {
        const double k = unit * static_cast<double>(n);
        const double l = k * k - k * k * k * k;
        c.ell[n] = l;
        c.E[n] = std::exp(l * dt);
        c.E2[n] = std::exp(l * dt / 2.0);
        cplx q = 0, a = 0, b = 0, d = 0;
        for (const cplx& r : roots) {
            const cplx z = l * dt + r;
            const cplx ez = std::exp(z);
            const cplx z3 = z * z * z;
            q += (std::exp(z / 2.0) - 1.0) / z;
            a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
            b += (2.0 + z + ez * (z - 2.0)) / z3;
            d += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
        }
        const double m = kContourPoints;
        c.Q[n] = dt * (q / m).real();
        c.f1[n] = dt * (a / m).real();
        c.f2[n] = 2.0 * dt * (b / m).real();
        c.f3[n] = dt * (d / m).real();
        c.g[n] = mask[n] ? cplx(0.0, -0.5 * k) : cplx(0.0);
    }
    return c;
}

void ks_etdrk4_step(std::vector<cplx>& v, const EtdCoefficients& c) {
    require(v.size() == c.g.size(), "KS step: coefficient count mismatch");
    thread_local std::vector<cplx> nv, na, nb, nc, a, b, cc;
    for (auto* w : {&nv, &na, &nb, &nc, &a, &b, &cc}) w->resize(v.size());
    Nonlinear nl(c);
    const std::size_t nm = v.size();

    nl(v, nv);
    for (std::size_t m = 0; m < nm; ++m) a[m] = c.E2[m] * v[m] + c.Q[m] * nv[m];
    nl(a, na);
    for (std::size_t m = 0; m < nm; ++m) b[m] = c.E2[m] * v[m] + c.Q[m] * na[m];
    nl(b, nb);
    for (std::size_t m = 0; m < nm; ++m) cc[m] = c.E2[m] * a[m] + c.Q[m] * (2.0 * nb[m] - nv[m]);
    nl(cc, nc);
    for (std::size_t m = 0; m < nm; ++m)
        v[m] = c.E[m] * v[m] + c.f1[m] * nv[m] + c.f2[m] * (na[m] + nb[m]) + c.f3[m] * nc[m];

    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NumericalError("KS step blew up (non-finite coefficients)");
}

spectral::SpectralField ks_etdrk4_step(const spectral::SpectralField& u_hat, const EtdCoefficients& c) {
    spectral::SpectralField out = u_hat;
    ks_etdrk4_step(out.coeffs, c);
    return out;
}

}  // namespace mno::systems
