#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace mno::systems {

/// Lorenz-63 in coordinates shifted so that z' = z - (r + alpha).
struct LorenzParams {
    double alpha = 10.0;
    double b = 8.0 / 3.0;
    double r = 28.0;
};

using Vec3 = std::array<double, 3>;

Vec3 lorenz_rhs(const Vec3& u, const LorenzParams& p);

/// out = f(in); both spans have the state dimension.
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/// Classical RK4. Throws NumericalError if the result is not finite.
std::vector<double> rk4_step(const VectorField& rhs, std::span<const double> u, double dt);

/// In-place RK4 for the Lorenz system, no allocation.
void lorenz_rk4_step(Vec3& u, const LorenzParams& p, double dt);

}  // namespace mno::systems
