#include "mno/core/state.hpp"

#include <cmath>

#include "mno/core/error.hpp"
#include "mno/simd/kernels.hpp"

namespace mno {

std::string to_string(StateKind kind) {
    switch (kind) {
    case StateKind::vector: return "vector";
    case StateKind::field1d: return "field1d";
    case StateKind::field2d: return "field2d";
    }
    return "unknown";
}

StateKind state_kind_from_string(const std::string& name) {
    if (name == "vector") return StateKind::vector;
    if (name == "field1d") return StateKind::field1d;
    if (name == "field2d") return StateKind::field2d;
    throw ValidationError("unknown state kind '" + name + "'");
}

double state_norm_squared(const StateShape& shape, std::span<const double> u) {
    const double ss = simd::dot(u.data(), u.data(), u.size());
    return shape.is_field() ? ss / static_cast<double>(u.size()) : ss;
}

double state_norm(const StateShape& shape, std::span<const double> u) {
    return std::sqrt(state_norm_squared(shape, u));
}

bool all_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace mno
