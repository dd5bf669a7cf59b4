#include "mno/systems/lorenz.hpp"

#include <cmath>

#include "mno/core/error.hpp"
#include "mno/core/state.hpp"

namespace mno::systems {

Vec3 lorenz_rhs(const Vec3& u, const LorenzParams& p) {
    const double x = u[0], y = u[1], z = u[2];
    return {p.alpha * (y - x), -p.alpha * x - y - x * z, x * y - p.b * z - p.b * (p.r + p.alpha)};
}

std::vector<double> rk4_step(const VectorField& rhs, std::span<const double> u, double dt) {
    require(dt > 0.0, "rk4 step needs dt > 0");
    const std::size_t n = u.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), out(n);
    rhs(u, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(out)) throw NumericalError("rk4 step produced non-finite values");
    return out;
}

void lorenz_rk4_step(Vec3& u, const LorenzParams& p, double dt) {
    const Vec3 k1 = lorenz_rhs(u, p);
    Vec3 t;
    for (int i = 0; i < 3; ++i) t[i] = u[i] + 0.5 * dt * k1[i];
    const Vec3 k2 = lorenz_rhs(t, p);
    for (int i = 0; i < 3; ++i) t[i] = u[i] + 0.5 * dt * k2[i];
    const Vec3 k3 = lorenz_rhs(t, p);
    for (int i = 0; i < 3; ++i) t[i] = u[i] + dt * k3[i];
    const Vec3 k4 = lorenz_rhs(t, p);
    for (int i = 0; i < 3; ++i) u[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace mno::systems
