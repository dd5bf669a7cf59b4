#include "mno/model/activation.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"

namespace mno::model {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::gelu: return "gelu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "gelu") return Activation::gelu;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    throw ValidationError("unknown activation '" + name + "'");
}

// exact erf form
void activate(Activation a, std::span<const double> in, std::span<double> out) {
    const std::size_t n = in.size();
    switch (a) {
    case Activation::gelu:
        for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * in[i] * (1.0 + std::erf(in[i] * std::numbers::sqrt2 / 2.0));
        break;
    case Activation::tanh:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
        break;
    case Activation::identity:
        if (out.data() != in.data()) std::copy(in.begin(), in.end(), out.begin());
        break;
    }
}

void activate_backward(Activation a, std::span<const double> pre, std::span<double> grad) {
    const std::size_t n = pre.size();
    switch (a) {
    case Activation::gelu: {
        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = pre[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
            grad[i] *= cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
        }
        break;
    }
    case Activation::tanh:
        for (std::size_t i = 0; i < n; ++i) {
            const double t = std::tanh(pre[i]);
            grad[i] *= 1.0 - t * t;
        }
        break;
    case Activation::identity: break;
    }
}

}  // namespace mno::model
