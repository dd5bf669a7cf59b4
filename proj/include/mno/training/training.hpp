#pragma once

// Step-wise Sobolev data loss plus the shell regularizer that pushes the model towards
// lambda * u far from the attractor, and the Adam loop that minimizes it.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mno/core/dataset.hpp"
#include "mno/core/rng.hpp"
#include "mno/model/model.hpp"
#include "mno/spectral/sobolev.hpp"
#include "mno/systems/grf.hpp"

namespace mno::training {

struct DissipativityConfig {
    bool enabled = false;
    double weight = 1.0;  // alpha_reg
    double lambda = 0.5;
    double shell_inner = 90.0;
    double shell_outer = 130.0;
    std::size_t samples_per_batch = 0;  // 0: one shell sample per data sample
    systems::GrfSpec direction;          // direction measure for field states

    void validate() const;
};

struct TrainConfig {
    int sobolev_order = 0;
    bool balanced = true;
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t halving_period = 10;  // 0 keeps the rate constant
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    DissipativityConfig dissipativity;
    bool residual_mode = false;
    double validation_fraction = 0.1;  // of trajectories, taken from the end

    spectral::SobolevSpec sobolev() const { return {sobolev_order, balanced}; }
    void validate() const;
};

/// lr0 * 2^(-floor(epoch / period)).
double learning_rate(const TrainConfig& cfg, std::size_t epoch);

/// Unit state-norm direction: normalized Gaussian on R^d, normalized GRF sample for fields.
std::vector<double> unit_direction(Rng& rng, const StateShape& shape, const systems::GrfSpec& grf);

/// Uniform direction (Gaussian on R^d, GRF normalized for fields) times a radius uniform
/// in [inner, outer]. The result has state norm equal to the radius.
std::vector<double> shell_sample(Rng& rng, const DissipativityConfig& cfg, const StateShape& shape);

/// `count` shell samples back to back.
std::vector<double> shell_batch(Rng& rng, const DissipativityConfig& cfg, const StateShape& shape,
                                std::size_t count);

struct LossValue {
    double total = 0.0;
    double data = 0.0;
    double regularization = 0.0;
};

/// mean_i loss_k(model(u_i), S_h u_i) + weight * mean_j ||model(v_j) - lambda v_j||^2.
/// The gradient of the total is written into grad (overwritten). `shell` may be empty, in which
/// case the regularizer is skipped even if enabled. An empty data batch leaves the regularizer alone.
LossValue total_loss(const model::Model& m, const model::ModelParams& params, const StateShape& shape,
                     std::span<const double> inputs, std::span<const double> targets, std::span<const double> shell,
                     const spectral::SobolevSpec& sobolev, const DissipativityConfig& diss,
                     model::GradientBuffer* grad);

/// Mean relative Sobolev data loss without gradients.
double data_loss(const model::Model& m, const model::ModelParams& params, const StateShape& shape,
                 std::span<const double> inputs, std::span<const double> targets, const spectral::SobolevSpec& sobolev);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline constexpr double adam_beta1 = 0.9;
inline constexpr double adam_beta2 = 0.999;
inline constexpr double adam_eps = 1e-8;

/// One bias-corrected Adam step; increments state.t first.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

struct EpochRecord {
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0;
    double data_loss = 0.0;
    double regularization = 0.0;
    double validation_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    model::ModelParams params;
    std::vector<EpochRecord> history;
    std::size_t train_pairs = 0;
    std::size_t validation_pairs = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on shuffled minibatches. The model is taken as configured (scale included), except that
/// its residual flag is set from cfg. Throws NumericalError naming epoch and batch on a
/// non-finite loss.
TrainResult train(const PairDataset& data, model::Model& m, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Largest training-input state norm.
double max_state_norm(const PairDataset& data);

struct GradCheckBlock {
    std::string name;
    std::size_t checked = 0;
    double max_abs_error = 0.0;
    double rel_error = 0.0;  // max abs error / max |analytic gradient| in the block
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    double tolerance = 1e-5;
    bool passed = false;
    std::vector<GradCheckBlock> blocks;
};

struct GradCheckOptions {
    spectral::SobolevSpec sobolev;
    DissipativityConfig dissipativity;  // regularizer included when enabled
    std::size_t batch = 2;
    double tolerance = 1e-5;
    double spectral_boost = 20.0;  // random init leaves spectral weights tiny; scale them up
    bool corrupt_adjoint = false;  // test fixture: perturbs the analytic gradient
};

/// Compares analytic gradients of total_loss with central differences (step 1e-6 * max(1, |theta|))
/// for every parameter, on random inputs and targets drawn from `seed`.
GradCheckReport grad_check(const model::Model& m, const StateShape& shape, const GradCheckOptions& opt,
                           std::uint64_t seed);

}  // namespace mno::training
