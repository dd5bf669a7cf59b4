#pragma once

// Safety blend S'(u) = rho(|u|) S(u) + (1 - rho(|u|)) lambda u with a logistic rho, and
// sampled diagnostics of how closely a map follows lambda * u on norm shells.

#include <functional>
#include <span>
#include <vector>

#include "mno/core/rng.hpp"
#include "mno/core/state.hpp"
#include "mno/systems/grf.hpp"

namespace mno::dissipativity {

struct PostProcessConfig {
    double alpha = 100.0;  // transition radius
    double beta = 0.1;     // transition rate
    double lambda = 0.5;

    void validate() const;

    /// alpha = 2 * max_norm, beta = 10 / alpha.
    static PostProcessConfig from_max_norm(double max_norm, double lambda = 0.5);
};

/// 1 / (1 + exp(beta (norm - alpha))), evaluated without overflow.
double rho(double norm, const PostProcessConfig& cfg);

/// out = rho model_out + (1 - rho) lambda u, rho taken at the state norm of u.
void blend(const StateShape& shape, std::span<const double> u, std::span<const double> model_out,
           const PostProcessConfig& cfg, std::span<double> out);

using StepFn = std::function<void(std::span<const double> in, std::span<double> out)>;

/// Wraps a step function with the blend.
StepFn post_processed(StepFn step, StateShape shape, PostProcessConfig cfg);

struct ShellStats {
    double radius = 0.0;
    std::size_t samples = 0;
    double mean_error = 0.0;  // |S(u) - lambda u| / |u|
    double max_error = 0.0;
    double mean_ratio = 0.0;  // |S(u)| / |u|
    double max_ratio = 0.0;
};

struct DissipativityReport {
    double lambda = 0.5;
    std::vector<ShellStats> shells;
};

/// Samples n_samples states on each sphere |u| = r (direction as in shell sampling) and
/// aggregates the step function's deviation from lambda * u.
DissipativityReport dissipativity_report(const StepFn& step, const StateShape& shape, std::span<const double> radii,
                                         std::size_t n_samples, double lambda, Rng& rng,
                                         const systems::GrfSpec& direction = {});

/// Mean |S(v) - lambda v| / |v| over samples v uniform on the shell inner <= |v| <= outer.
double shell_error(const StepFn& step, const StateShape& shape, double inner, double outer, double lambda,
                   std::size_t n_samples, Rng& rng, const systems::GrfSpec& direction = {});

}  // namespace mno::dissipativity
