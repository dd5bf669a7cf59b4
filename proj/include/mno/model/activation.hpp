#pragma once

#include <span>
#include <string>

namespace mno::model {

enum class Activation { gelu, tanh, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// out[i] = act(in[i]).
void activate(Activation a, std::span<const double> in, std::span<double> out);

/// grad[i] *= act'(pre[i]).
void activate_backward(Activation a, std::span<const double> pre, std::span<double> grad);

}  // namespace mno::model
