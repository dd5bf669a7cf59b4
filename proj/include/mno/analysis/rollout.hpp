#pragma once

#include <limits>
#include <span>
#include <string>

#include "mno/core/dataset.hpp"
#include "mno/dissipativity/dissipativity.hpp"
#include "mno/model/model.hpp"
#include "mno/systems/solver.hpp"

namespace mno::analysis {

using dissipativity::StepFn;

/// Learned map as a step function. The model and parameters must outlive it.
StepFn model_step(const model::Model& m, const model::ModelParams& params, const StateShape& shape);

/// Reference flow map S_h; shares the solver's integration path.
StepFn solver_step(systems::Solver& solver);

struct RolloutOptions {
    double perturb_scale = 1.0;  // u0 is multiplied by this before the first step
    double blowup_bound = std::numeric_limits<double>::infinity();  // state-norm bound
};

struct RolloutResult {
    Trajectory trajectory;  // snapshots 0..steps, or up to the last good state
    bool blew_up = false;
    std::size_t blowup_step = 0;  // index of the offending step (1-based)
    std::string message;
};

/// n compositions of step from u0 * perturb_scale. Stops at the first non-finite state, state norm
/// above the bound, or NumericalError from the step.
RolloutResult rollout(const StepFn& step, const StateShape& shape, std::span<const double> u0, std::size_t n,
                      const RolloutOptions& opt = {}, double h = 0.0, const std::string& provenance = "");

/// Mean over pairs of |S(u) - S_h u| / |S_h u|.
double per_step_error(const StepFn& step, const PairDataset& data);

/// Mean over start indices i (every `stride`-th) of |S^n(u_i) - u_{i+n}| / |u_{i+n}| along a
/// reference trajectory.
double composition_error(const StepFn& step, const Trajectory& reference, std::size_t n, std::size_t stride = 1);

/// Reference trajectory from a pair dataset: trajectory `index` rebuilt from its consecutive pairs.
Trajectory trajectory_from_pairs(const PairDataset& data, std::size_t index);

}  // namespace mno::analysis
