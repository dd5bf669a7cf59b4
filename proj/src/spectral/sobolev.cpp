#include "mno/spectral/sobolev.hpp"

#include <cmath>

#include "mno/core/error.hpp"
#include "mno/simd/kernels.hpp"

namespace mno::spectral {

void validate(const SobolevSpec& spec, const StateShape& shape) {
    require(spec.order >= 0 && spec.order <= 4, "sobolev order must be in 0..4");
    require(shape.is_field() || spec.order == 0, "sobolev order > 0 needs a field state");
}

std::vector<double> derivative_weights(const StateShape& shape, int i) {
    std::vector<double> w(spectral_size(shape));
    for (std::size_t s = 0; s < w.size(); ++s) w[s] = std::pow(kappa_squared(shape, s), i);
    return w;
}

std::vector<double> sobolev_weights(const StateShape& shape, int k) {
    std::vector<double> w(spectral_size(shape), 0.0);
    for (std::size_t s = 0; s < w.size(); ++s) {
        const double k2 = kappa_squared(shape, s);
        double term = 1.0;
        for (int j = 0; j <= k; ++j) {
            w[s] += term;
            term *= k2;
        }
    }
    return w;
}

double weighted_norm(const StateShape& shape, std::span<const cplx> f_hat, std::span<const double> weights) {
    double sum = 0.0;
    for (std::size_t s = 0; s < f_hat.size(); ++s) sum += multiplicity(shape, s) * weights[s] * std::norm(f_hat[s]);
    return std::sqrt(sum);
}

double sobolev_norm(const GridField& f, int k) {
    require(k >= 0, "sobolev order must be non-negative");
    const SpectralField f_hat = transform_forward(f);
    return weighted_norm(f.shape, f_hat.coeffs, sobolev_weights(f.shape, k));
}

namespace {

double vector_loss(std::span<const double> pred, std::span<const double> truth, std::span<double> grad) {
    const std::size_t n = pred.size();
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = pred[i] - truth[i];
    const double en = std::sqrt(simd::dot(e.data(), e.data(), n));
    const double tn = std::sqrt(simd::dot(truth.data(), truth.data(), n));
    if (tn == 0.0) throw NumericalError("relative loss: truth has zero norm");
    if (!grad.empty()) {
        const double s = en > 0.0 ? 1.0 / (en * tn) : 0.0;
        for (std::size_t i = 0; i < n; ++i) grad[i] = s * e[i];
    }
    return en / tn;
}

}  // namespace

double relative_sobolev_loss_grad(const StateShape& shape, std::span<const double> pred,
                                  std::span<const double> truth, const SobolevSpec& spec, std::span<double> grad) {
    validate(spec, shape);
    require(pred.size() == shape.size() && truth.size() == shape.size(), "relative loss: size mismatch");
    require(grad.empty() || grad.size() == shape.size(), "relative loss: gradient size mismatch");
    if (!shape.is_field()) return vector_loss(pred, truth, grad);

    const std::size_t np = shape.size();
    const std::size_t nm = spectral_size(shape);
    std::vector<double> e(np);
    for (std::size_t i = 0; i < np; ++i) e[i] = pred[i] - truth[i];
    std::vector<cplx> e_hat(nm), t_hat(nm);
    forward(shape, e, e_hat);
    forward(shape, truth, t_hat);

    // accumulated cotangent in coefficient space; mapped back once at the end
    std::vector<cplx> g_hat;
    if (!grad.empty()) g_hat.assign(nm, 0.0);

    double loss = 0.0;
    auto add_term = [&](const std::vector<double>& w, int order) {
        const double en = weighted_norm(shape, e_hat, w);
        const double tn = weighted_norm(shape, t_hat, w);
        if (tn == 0.0)
            throw NumericalError("relative loss: truth has zero norm at derivative order " + std::to_string(order));
        loss += en / tn;
        if (!grad.empty() && en > 0.0) {
            const double s = 1.0 / (en * tn * static_cast<double>(np));
            for (std::size_t m = 0; m < nm; ++m) g_hat[m] += (s * w[m]) * e_hat[m];
        }
    };
    if (spec.balanced) {
        for (int i = 0; i <= spec.order; ++i) add_term(derivative_weights(shape, i), i);
    } else {
        add_term(sobolev_weights(shape, spec.order), spec.order);
    }
    if (!grad.empty()) inverse(shape, g_hat, grad);
    return loss;
}

double relative_sobolev_loss(const StateShape& shape, std::span<const double> pred, std::span<const double> truth,
                             const SobolevSpec& spec) {
    return relative_sobolev_loss_grad(shape, pred, truth, spec, {});
}

}  // namespace mno::spectral
