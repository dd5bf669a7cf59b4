#pragma once

// Experiment configuration files (JSON). Unknown keys are rejected, missing keys take the
// per-system defaults, and cross-field checks name the offending field.

#include <json.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mno/dissipativity/dissipativity.hpp"
#include "mno/model/model.hpp"
#include "mno/systems/solver.hpp"
#include "mno/training/training.hpp"

namespace mno::io {

struct DataSection {
    std::size_t n_traj = 1;
    double t_burn = 0.0;
    double t_end = 1.0;
    std::uint64_t seed = 0;
};

struct ModelSection {
    nlohmann::json architecture;  // full architecture with residual and scale filled in
    bool auto_scale = false;      // scale = largest training-input norm
};

struct PostprocessSection {
    bool enabled = false;
    dissipativity::PostProcessConfig cfg;
    bool auto_radius = false;  // alpha = 2 max norm, beta = 10 / alpha
};

struct AnalysisSection {
    std::size_t rollout_steps = 1000;
    double perturb_scale = 1.0;
    double blowup_bound = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> burn_in;  // default: 10% of snapshots
    std::vector<std::string> which = {"all"};
    std::string spectrum_quantity = "vorticity";
    std::size_t pod_rank = 8;
    std::size_t histogram_bins = 50;
    std::size_t max_lag = 100;
};

struct GradcheckSection {
    std::size_t batch = 2;
    double tolerance = 1e-5;
    double spectral_boost = 20.0;
    bool corrupt_adjoint = false;
};

struct ExperimentConfig {
    systems::SolverConfig solver;
    systems::GrfSpec grf;
    DataSection data;
    ModelSection model;
    training::TrainConfig training;
    bool auto_shell = false;  // inner = max norm / lambda, outer = 1.3 inner
    PostprocessSection postprocess;
    AnalysisSection analysis;
    GradcheckSection gradcheck;

    systems::GenerateRequest generate_request() const;
    /// Model with the configured scale, or `max_norm` when the scale is "auto".
    model::Model build_model(double max_norm = 1.0) const;
    /// Training config with "auto" shells resolved against the training data.
    training::TrainConfig resolved_training(double max_norm) const;
    dissipativity::PostProcessConfig resolved_postprocess(double max_norm) const;
};

/// Throws ValidationError naming the field on any problem.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// The system section in config syntax, so it can be embedded in files and parsed back.
nlohmann::json system_to_json(const systems::SolverConfig& solver, const systems::GrfSpec& grf);

/// Parses only a system section; the other sections keep their defaults unvalidated.
ExperimentConfig system_from_json(const nlohmann::json& system);

/// Statistic names accepted in analysis.which.
const std::vector<std::string>& statistic_names();

}  // namespace mno::io
