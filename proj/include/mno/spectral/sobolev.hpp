#pragma once

#include <span>
#include <vector>

#include "mno/core/state.hpp"
#include "mno/spectral/field.hpp"

namespace mno::spectral {

/// H^k with p = 2.
struct SobolevSpec {
    int order = 0;         // k in 0..4
    bool balanced = true;  // sum of per-order relative errors, else one weighted norm
};

void validate(const SobolevSpec& spec, const StateShape& shape);

/// Per stored mode: |kappa|^(2 i).
std::vector<double> derivative_weights(const StateShape& shape, int i);

/// Per stored mode: 1 + |kappa|^2 + ... + |kappa|^(2k).
std::vector<double> sobolev_weights(const StateShape& shape, int k);

/// sqrt(sum over the full spectrum of weight * |f_hat|^2).
double weighted_norm(const StateShape& shape, std::span<const cplx> f_hat, std::span<const double> weights);

/// Sobolev norm ||f||_{k,2}. k = 0 is the coefficient l2 norm (grid RMS).
double sobolev_norm(const GridField& f, int k);

/// Relative Sobolev loss between pred and truth. Vector states accept order 0 only
/// and use the Euclidean norm. Throws NumericalError if a truth norm term is zero.
double relative_sobolev_loss(const StateShape& shape, std::span<const double> pred, std::span<const double> truth,
                             const SobolevSpec& spec);

/// Same loss, also writing d loss / d pred into grad.
double relative_sobolev_loss_grad(const StateShape& shape, std::span<const double> pred,
                                  std::span<const double> truth, const SobolevSpec& spec, std::span<double> grad);

inline double relative_sobolev_loss(const GridField& pred, const GridField& truth, const SobolevSpec& spec) {
    return relative_sobolev_loss(pred.shape, pred.values, truth.values, spec);
}

}  // namespace mno::spectral
