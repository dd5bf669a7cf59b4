#pragma once

#include <memory>
#include <span>
#include <string>

#include "mno/core/dataset.hpp"
#include "mno/core/rng.hpp"
#include "mno/systems/grf.hpp"
#include "mno/systems/lorenz.hpp"

namespace mno::systems {

enum class SystemTag { lorenz, ks, kolmogorov };

std::string to_string(SystemTag tag);
SystemTag system_from_string(const std::string& name);

struct SolverConfig {
    SystemTag system = SystemTag::lorenz;
    double dt = 0.005;
    std::size_t sample_stride = 10;  // h = dt * stride
    double reynolds = 40.0;
    int forcing_wavenumber = 4;
    std::size_t resolution = 3;
    double domain_length = 1.0;
    LorenzParams lorenz;

    double h() const { return dt * static_cast<double>(sample_stride); }
    StateShape shape() const;
    void validate() const;

    static SolverConfig lorenz_default();
    static SolverConfig ks_default(double h = 1.0);
    static SolverConfig kolmogorov_default(double h = 1.0);
};

/// Ground-truth flow map S_h on grid-space states. Spectral solvers keep their state in
/// coefficient space between snapshots.
class Solver {
public:
    explicit Solver(const SolverConfig& cfg);
    ~Solver();
    Solver(Solver&&) noexcept;
    Solver& operator=(Solver&&) noexcept;

    const SolverConfig& config() const;
    StateShape shape() const;

    /// Passing back the grid last returned by get_state resumes from the exact internal state.
    void set_state(std::span<const double> u);
    void get_state(std::span<double> u);
    /// Advances by `snapshots` sample intervals h. Throws NumericalError on blow-up.
    void advance(std::size_t snapshots = 1);
    /// out = S_h(in).
    void step(std::span<const double> in, std::span<double> out);

    /// Largest CFL number seen since construction (Kolmogorov only, 0 otherwise).
    double max_cfl() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Initial conditions: Lorenz uniform in [-20, 20]^3 in the classical coordinates; fields from the GRF.
std::vector<double> sample_initial_condition(const SolverConfig& cfg, const GrfSpec& grf, Rng& rng);

struct GenerateRequest {
    SolverConfig solver;
    GrfSpec grf;
    std::size_t n_traj = 1;
    double t_burn = 0.0;
    double t_end = 1.0;
    std::uint64_t seed = 0;
};

/// Snapshot pairs per trajectory: round((t_end - t_burn) / h).
std::size_t pairs_per_trajectory(const GenerateRequest& req);

/// Trajectories are integrated in parallel, each with stream seed mix(seed) ^ index.
PairDataset generate_dataset(const GenerateRequest& req);

}  // namespace mno::systems
