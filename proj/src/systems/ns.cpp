#include "mno/systems/ns.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"

namespace mno::systems {
namespace {

struct Workspace {
    std::vector<cplx> uh, vh, wxh, wyh, prod;
    std::vector<double> u, v, wx, wy, adv;

    void resize(std::size_t modes, std::size_t points) {
        for (auto* a : {&uh, &vh, &wxh, &wyh, &prod}) a->resize(modes);
        for (auto* a : {&u, &v, &wx, &wy, &adv}) a->resize(points);
    }
};

thread_local Workspace t_ws;

void velocity(const std::vector<cplx>& w, const NsOperator& op, Workspace& ws) {
    for (std::size_t m = 0; m < w.size(); ++m) {
        const cplx psi = w[m] * op.inv_k2[m];
        ws.uh[m] = cplx(0.0, op.ky[m]) * psi;
        ws.vh[m] = cplx(0.0, -op.kx[m]) * psi;
    }
    spectral::inverse(op.shape, ws.uh, ws.u);
    spectral::inverse(op.shape, ws.vh, ws.v);
}

// -(u . grad w) + g, dealiased, zero mean
void rhs(const std::vector<cplx>& w, const NsOperator& op, std::vector<cplx>& out) {
    Workspace& ws = t_ws;
    ws.resize(w.size(), op.shape.size());
    velocity(w, op, ws);
    for (std::size_t m = 0; m < w.size(); ++m) {
        ws.wxh[m] = cplx(0.0, op.kx[m]) * w[m];
        ws.wyh[m] = cplx(0.0, op.ky[m]) * w[m];
    }
    spectral::inverse(op.shape, ws.wxh, ws.wx);
    spectral::inverse(op.shape, ws.wyh, ws.wy);
    for (std::size_t p = 0; p < ws.adv.size(); ++p) ws.adv[p] = ws.u[p] * ws.wx[p] + ws.v[p] * ws.wy[p];
    spectral::forward(op.shape, ws.adv, ws.prod);
    for (std::size_t m = 0; m < w.size(); ++m) {
        out[m] = op.mask[m] ? -ws.prod[m] : cplx(0.0);
        if (op.forcing) out[m] += op.forcing_hat[m];
    }
    out[0] = 0.0;
}

}  // namespace

NsOperator ns_prepare(std::size_t resolution, double dt, double reynolds, int forcing_wavenumber, bool forcing) {
    require(is_power_of_two(resolution) && resolution >= 4, "NS resolution must be a power of two >= 4");
    require(dt > 0.0, "NS dt must be positive");
    require(reynolds > 0.0, "reynolds must be positive");
    require(forcing_wavenumber >= 1 && static_cast<std::size_t>(forcing_wavenumber) < resolution / 3,
            "forcing wavenumber must be inside the dealiased band");

    NsOperator op;
    op.shape = StateShape::field2d(resolution, 2.0 * std::numbers::pi);
    op.dt = dt;
    op.reynolds = reynolds;
    op.forcing_wavenumber = forcing_wavenumber;
    op.forcing = forcing;
    const std::size_t nm = spectral::spectral_size(op.shape);
    op.integrating_factor.resize(nm);
    op.kx.resize(nm);
    op.ky.resize(nm);
    op.inv_k2.resize(nm);
    op.forcing_hat.assign(nm, 0.0);
    op.mask = spectral::dealias_mask(op.shape);
    const long nyq = static_cast<long>(resolution / 2);
    for (std::size_t m = 0; m < nm; ++m) {
        const spectral::Mode md = spectral::mode_at(op.shape, m);
        const double k2 = spectral::kappa_squared(op.shape, m);
        op.integrating_factor[m] = std::exp(-k2 * dt / reynolds);
        op.kx[m] = md.nx == nyq ? 0.0 : static_cast<double>(md.nx);
        op.ky[m] = std::abs(md.ny) == nyq ? 0.0 : static_cast<double>(md.ny);
        op.inv_k2[m] = k2 > 0.0 ? 1.0 / k2 : 0.0;
        // -n cos(n y) = -n/2 (e^{i n y} + e^{-i n y})
        if (md.nx == 0 && std::abs(md.ny) == forcing_wavenumber) op.forcing_hat[m] = -0.5 * forcing_wavenumber;
    }
    return op;
}

double ns_cfl(const std::vector<cplx>& w_hat, const NsOperator& op) {
    Workspace& ws = t_ws;
    ws.resize(w_hat.size(), op.shape.size());
    velocity(w_hat, op, ws);
    double vmax = 0.0;
    for (std::size_t p = 0; p < ws.u.size(); ++p) vmax = std::max(vmax, std::abs(ws.u[p]) + std::abs(ws.v[p]));
    const double dx = op.shape.domain_length / static_cast<double>(op.shape.n);
    return vmax * op.dt / dx;
}

void ns_step(std::vector<cplx>& w, const NsOperator& op) {
    require(w.size() == op.kx.size(), "NS step: coefficient count mismatch");
    const std::size_t nm = w.size();
    thread_local std::vector<cplx> n0, n1, ws;
    n0.resize(nm);
    n1.resize(nm);
    ws.resize(nm);
    const double dt = op.dt;
    const auto& ef = op.integrating_factor;

    rhs(w, op, n0);
    for (std::size_t m = 0; m < nm; ++m) ws[m] = ef[m] * (w[m] + dt * n0[m]);
    rhs(ws, op, n1);
    for (std::size_t m = 0; m < nm; ++m) w[m] = ef[m] * w[m] + 0.5 * dt * (ef[m] * n0[m] + n1[m]);
    w[0] = 0.0;

    for (const cplx& z : w)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NumericalError("NS step blew up (non-finite coefficients)");
}

spectral::SpectralField ns_step(const spectral::SpectralField& w_hat, const NsOperator& op) {
    spectral::SpectralField out = w_hat;
    ns_step(out.coeffs, op);
    return out;
}

}  // namespace mno::systems
