#pragma once

// Learned one-step maps. Both networks see the state divided by a fixed scale and their
// output is multiplied back, so model(u) = scale * net(u / scale), plus u in residual mode.

#include <complex>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mno/core/state.hpp"
#include "mno/model/activation.hpp"
#include "mno/model/params.hpp"

namespace mno::model {

struct FfnArchitecture {
    std::size_t input_dim = 3;
    std::size_t output_dim = 3;
    std::size_t hidden_layers = 6;  // 0 gives a single affine map
    std::size_t hidden_width = 150;
    Activation activation = Activation::gelu;
    bool residual = false;
    double scale = 1.0;

    void validate() const;
};

struct FnoArchitecture {
    int dimension = 1;
    std::size_t width = 32;
    std::size_t modes = 12;  // per axis
    std::size_t n_layers = 4;
    std::size_t projection_width = 128;
    Activation activation = Activation::gelu;
    bool residual = false;
    double scale = 1.0;

    /// field value + one normalized coordinate per axis
    std::size_t in_channels() const { return 1 + static_cast<std::size_t>(dimension); }
    /// retained (kx, ky) pairs: modes in 1D, 2 * modes * modes in 2D
    std::size_t retained_modes() const { return dimension == 2 ? 2 * modes * modes : modes; }
    void validate() const;
};

/// Saved activations of one forward pass.
struct Tape {
    StateShape shape;
    std::size_t batch = 0;
    std::vector<std::vector<double>> real;
    std::vector<std::vector<std::complex<double>>> spectral;
};

class Model {
public:
    explicit Model(const FfnArchitecture& arch);
    explicit Model(const FnoArchitecture& arch);

    bool is_fno() const { return std::holds_alternative<FnoArchitecture>(arch_); }
    const FfnArchitecture& ffn() const { return std::get<FfnArchitecture>(arch_); }
    const FnoArchitecture& fno() const { return std::get<FnoArchitecture>(arch_); }
    bool residual() const;
    double scale() const;
    void set_scale(double s);
    void set_residual(bool r);

    const ParamLayout& layout() const { return layout_; }

    /// Random initialization; spectral weights uniform in a disk of radius 1/(width modes^(dim/2)),
    /// affine weights and biases uniform in +-1/sqrt(fan_in).
    ModelParams init(std::uint64_t seed) const;

    /// Throws ValidationError if the model cannot act on states of this shape.
    void check_shape(const StateShape& shape) const;

    /// out = model(in) for `batch` states stored back to back. The tape, when given, is
    /// filled for a later backward pass.
    void forward(const ModelParams& params, const StateShape& shape, std::span<const double> in, std::size_t batch,
                 std::span<double> out, Tape* tape = nullptr) const;

    /// Accumulates d loss / d params into grad for the cotangent dout of the recorded forward
    /// pass, and writes d loss / d in into din when din is not empty.
    void backward(const ModelParams& params, const Tape& tape, std::span<const double> dout, GradientBuffer& grad,
                  std::span<double> din = {}) const;

    std::vector<double> apply(const ModelParams& params, const StateShape& shape, std::span<const double> u) const;

private:
    std::variant<FfnArchitecture, FnoArchitecture> arch_;
    ParamLayout layout_;
};

ParamLayout ffn_layout(const FfnArchitecture& arch);
ParamLayout fno_layout(const FnoArchitecture& arch);

/// Stored half-spectrum indices of the retained modes at resolution n, in weight order.
std::vector<std::size_t> retained_mode_indices(const FnoArchitecture& arch, std::size_t n);

}  // namespace mno::model
