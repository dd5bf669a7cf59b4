#include "mno/dissipativity/dissipativity.hpp"

#include <algorithm>
#include <cmath>

#include "mno/core/error.hpp"
#include "mno/training/training.hpp"

namespace mno::dissipativity {

void PostProcessConfig::validate() const {
    require(alpha > 0.0, "postprocess.alpha must be > 0");
    require(beta > 0.0, "postprocess.beta must be > 0");
    require(lambda > 0.0 && lambda < 1.0, "postprocess.lambda must lie in (0, 1)");
}

PostProcessConfig PostProcessConfig::from_max_norm(double max_norm, double lambda) {
    require(max_norm > 0.0, "post-processing defaults need a positive training norm");
    const double a = 2.0 * max_norm;
    return {a, 10.0 / a, lambda};
}

double rho(double norm, const PostProcessConfig& cfg) {
    const double z = cfg.beta * (norm - cfg.alpha);
    if (z > 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

void blend(const StateShape& shape, std::span<const double> u, std::span<const double> model_out,
           const PostProcessConfig& cfg, std::span<double> out) {
    require(u.size() == shape.size() && model_out.size() == u.size() && out.size() == u.size(),
            "post-processing: size mismatch");
    const double r = rho(state_norm(shape, u), cfg);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = r * model_out[i] + (1.0 - r) * cfg.lambda * u[i];
}

StepFn post_processed(StepFn step, StateShape shape, PostProcessConfig cfg) {
    cfg.validate();
    return [step = std::move(step), shape, cfg](std::span<const double> in, std::span<double> out) {
        std::vector<double> y(in.size());
        step(in, y);
        blend(shape, in, y, cfg, out);
    };
}

namespace {

void accumulate(ShellStats& s, const StateShape& shape, std::span<const double> v, std::span<const double> y,
                double lambda) {
    const double nv = state_norm(shape, v);
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = y[i] - lambda * v[i];
    const double e = state_norm(shape, r) / nv, q = state_norm(shape, y) / nv;
    s.mean_error += e;
    s.max_error = std::max(s.max_error, e);
    s.mean_ratio += q;
    s.max_ratio = std::max(s.max_ratio, q);
    ++s.samples;
}

}  // namespace

DissipativityReport dissipativity_report(const StepFn& step, const StateShape& shape, std::span<const double> radii,
                                         std::size_t n_samples, double lambda, Rng& rng,
                                         const systems::GrfSpec& direction) {
    require(n_samples >= 1, "dissipativity report needs n_samples >= 1");
    DissipativityReport rep;
    rep.lambda = lambda;
    std::vector<double> y(shape.size());
    for (double radius : radii) {
        require(radius > 0.0, "shell radii must be positive");
        ShellStats s;
        s.radius = radius;
        for (std::size_t k = 0; k < n_samples; ++k) {
            auto v = training::unit_direction(rng, shape, direction);
            for (double& x : v) x *= radius;
            step(v, y);
            accumulate(s, shape, v, y, lambda);
        }
        s.mean_error /= static_cast<double>(n_samples);
        s.mean_ratio /= static_cast<double>(n_samples);
        rep.shells.push_back(s);
    }
    return rep;
}

double shell_error(const StepFn& step, const StateShape& shape, double inner, double outer, double lambda,
                   std::size_t n_samples, Rng& rng, const systems::GrfSpec& direction) {
    require(n_samples >= 1, "shell error needs n_samples >= 1");
    training::DissipativityConfig cfg;
    cfg.enabled = true;
    cfg.lambda = lambda;
    cfg.shell_inner = inner;
    cfg.shell_outer = outer;
    cfg.direction = direction;
    cfg.validate();
    ShellStats s;
    std::vector<double> y(shape.size());
    for (std::size_t k = 0; k < n_samples; ++k) {
        const auto v = training::shell_sample(rng, cfg, shape);
        step(v, y);
        accumulate(s, shape, v, y, lambda);
    }
    return s.mean_error / static_cast<double>(n_samples);
}

}  // namespace mno::dissipativity
