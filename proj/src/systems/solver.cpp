#include "mno/systems/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "mno/core/error.hpp"
#include "mno/core/parallel.hpp"
#include "mno/systems/ks.hpp"
#include "mno/systems/ns.hpp"

namespace mno::systems {

std::string to_string(SystemTag tag) {
    switch (tag) {
    case SystemTag::lorenz: return "lorenz";
    case SystemTag::ks: return "ks";
    case SystemTag::kolmogorov: return "kolmogorov";
    }
    return "unknown";
}

SystemTag system_from_string(const std::string& name) {
    if (name == "lorenz") return SystemTag::lorenz;
    if (name == "ks") return SystemTag::ks;
    if (name == "kolmogorov") return SystemTag::kolmogorov;
    throw ValidationError("unknown system '" + name + "' (expected lorenz, ks or kolmogorov)");
}

StateShape SolverConfig::shape() const {
    switch (system) {
    case SystemTag::lorenz: return StateShape::vector(3);
    case SystemTag::ks: return StateShape::field1d(resolution, domain_length);
    case SystemTag::kolmogorov: return StateShape::field2d(resolution, 2.0 * std::numbers::pi);
    }
    return {};
}

void SolverConfig::validate() const {
    require(dt > 0.0, "system.dt must be positive");
    require(sample_stride >= 1, "system.sample_stride must be at least 1");
    if (system == SystemTag::lorenz) return;
    require(is_power_of_two(resolution) && resolution >= 4, "system.resolution must be a power of two >= 4");
    if (system == SystemTag::ks) require(domain_length > 0.0, "system.domain_length must be positive");
    if (system == SystemTag::kolmogorov) {
        require(reynolds > 0.0, "system.reynolds must be positive");
        require(forcing_wavenumber >= 1 && static_cast<std::size_t>(forcing_wavenumber) < resolution / 3,
                "system.forcing_wavenumber must lie inside the dealiased band");
    }
}

SolverConfig SolverConfig::lorenz_default() { return SolverConfig{}; }

SolverConfig SolverConfig::ks_default(double h) {
    SolverConfig c;
    c.system = SystemTag::ks;
    c.resolution = 256;
    c.domain_length = 32.0 * std::numbers::pi;
    c.sample_stride = static_cast<std::size_t>(std::max(1.0, std::round(h / 0.002)));
    c.dt = h / static_cast<double>(c.sample_stride);
    return c;
}

SolverConfig SolverConfig::kolmogorov_default(double h) {
    SolverConfig c;
    c.system = SystemTag::kolmogorov;
    c.resolution = 32;
    c.domain_length = 2.0 * std::numbers::pi;
    c.reynolds = 40.0;
    c.forcing_wavenumber = 4;
    c.sample_stride = static_cast<std::size_t>(std::max(1.0, std::round(h / 0.02)));
    c.dt = h / static_cast<double>(c.sample_stride);
    return c;
}

struct Solver::Impl {
    SolverConfig cfg;
    StateShape shape;
    Vec3 lorenz{};
    std::vector<cplx> coeffs;
    // last grid handed out by get_state; feeding it back resumes from coeffs exactly
    std::vector<double> emitted;
    bool emitted_valid = false;
    std::optional<EtdCoefficients> ks;
    std::optional<NsOperator> ns;
    double max_cfl = 0.0;
    bool cfl_warned = false;
};

Solver::Solver(const SolverConfig& cfg) : impl_(std::make_unique<Impl>()) {
    cfg.validate();
    impl_->cfg = cfg;
    impl_->shape = cfg.shape();
    if (cfg.system == SystemTag::ks) impl_->ks = ks_precompute(cfg.resolution, cfg.domain_length, cfg.dt);
    if (cfg.system == SystemTag::kolmogorov)
        impl_->ns = ns_prepare(cfg.resolution, cfg.dt, cfg.reynolds, cfg.forcing_wavenumber);
    if (impl_->shape.is_field()) impl_->coeffs.assign(spectral::spectral_size(impl_->shape), 0.0);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

const SolverConfig& Solver::config() const { return impl_->cfg; }
StateShape Solver::shape() const { return impl_->shape; }
double Solver::max_cfl() const { return impl_->max_cfl; }

void Solver::set_state(std::span<const double> u) {
    require(u.size() == impl_->shape.size(), "solver state size mismatch");
    if (!all_finite(u)) throw NumericalError("solver initial state is not finite");
    if (impl_->cfg.system == SystemTag::lorenz) {
        impl_->lorenz = {u[0], u[1], u[2]};
        return;
    }
    if (impl_->emitted_valid && std::equal(u.begin(), u.end(), impl_->emitted.begin())) return;
    impl_->emitted_valid = false;
    spectral::forward(impl_->shape, u, impl_->coeffs);
    if (impl_->cfg.system == SystemTag::kolmogorov) impl_->coeffs[0] = 0.0;
}

void Solver::get_state(std::span<double> u) {
    require(u.size() == impl_->shape.size(), "solver state size mismatch");
    if (impl_->cfg.system == SystemTag::lorenz) {
        for (int i = 0; i < 3; ++i) u[i] = impl_->lorenz[i];
        return;
    }
    spectral::inverse(impl_->shape, impl_->coeffs, u);
    impl_->emitted.assign(u.begin(), u.end());
    impl_->emitted_valid = true;
}

void Solver::advance(std::size_t snapshots) {
    Impl& s = *impl_;
    s.emitted_valid = false;
    const std::size_t steps = snapshots * s.cfg.sample_stride;
    switch (s.cfg.system) {
    case SystemTag::lorenz:
        for (std::size_t i = 0; i < steps; ++i) lorenz_rk4_step(s.lorenz, s.cfg.lorenz, s.cfg.dt);
        if (!all_finite(s.lorenz)) throw NumericalError("Lorenz integration produced non-finite values");
        break;
    case SystemTag::ks:
        for (std::size_t i = 0; i < steps; ++i) ks_etdrk4_step(s.coeffs, *s.ks);
        break;
    case SystemTag::kolmogorov:
        for (std::size_t i = 0; i < steps; ++i) {
            ns_step(s.coeffs, *s.ns);
            if (i + 1 == steps || i % 16 == 0) {
                const double cfl = ns_cfl(s.coeffs, *s.ns);
                s.max_cfl = std::max(s.max_cfl, cfl);
            }
        }
        break;
    }
}

void Solver::step(std::span<const double> in, std::span<double> out) {
    set_state(in);
    advance(1);
    get_state(out);
}

std::vector<double> sample_initial_condition(const SolverConfig& cfg, const GrfSpec& grf, Rng& rng) {
    const StateShape shape = cfg.shape();
    if (cfg.system == SystemTag::lorenz) {
        std::vector<double> u(3);
        for (double& x : u) x = uniform(rng, -20.0, 20.0);
        u[2] -= cfg.lorenz.r + cfg.lorenz.alpha;
        return u;
    }
    require(grf.dimension == shape.dimension(), "grf dimension does not match the system");
    spectral::SpectralField f = grf_sample_hat(grf, cfg.resolution, rng);
    f.shape = shape;
    const auto mask = spectral::dealias_mask(shape);
    for (std::size_t m = 0; m < f.coeffs.size(); ++m)
        if (!mask[m]) f.coeffs[m] = 0.0;
    return spectral::transform_inverse(f).values;
}

std::size_t pairs_per_trajectory(const GenerateRequest& req) {
    return static_cast<std::size_t>(std::llround((req.t_end - req.t_burn) / req.solver.h()));
}

PairDataset generate_dataset(const GenerateRequest& req) {
    req.solver.validate();
    require(req.n_traj >= 1, "data.n_traj must be at least 1");
    require(req.t_burn >= 0.0 && req.t_burn < req.t_end, "data.t_burn must satisfy 0 <= t_burn < t_end");
    if (req.solver.system != SystemTag::lorenz) req.grf.validate();

    const std::size_t per = pairs_per_trajectory(req);
    require(per >= 1, "data window shorter than one sample interval");
    const std::size_t burn = static_cast<std::size_t>(std::llround(req.t_burn / req.solver.h()));
    const StateShape shape = req.solver.shape();
    const std::size_t d = shape.size();

    PairDataset ds;
    ds.system = to_string(req.solver.system);
    ds.shape = shape;
    ds.dt = req.solver.dt;
    ds.h = req.solver.h();
    ds.seed = req.seed;
    ds.n_traj = req.n_traj;
    ds.pairs_per_traj = per;
    ds.inputs.assign(req.n_traj * per * d, 0.0);
    ds.outputs.assign(req.n_traj * per * d, 0.0);

    parallel_for(req.n_traj, [&](std::size_t i) {
        Rng rng(stream_seed(req.seed, i));
        Solver solver(req.solver);
        try {
            solver.set_state(sample_initial_condition(req.solver, req.grf, rng));
            solver.advance(burn);
            double* in = ds.inputs.data() + i * per * d;
            double* out = ds.outputs.data() + i * per * d;
            solver.get_state({in, d});
            for (std::size_t p = 0; p < per; ++p) {
                solver.advance(1);
                solver.get_state({out + p * d, d});
                if (!all_finite({out + p * d, d})) throw NumericalError("non-finite state");
                if (p + 1 < per) std::copy(out + p * d, out + (p + 1) * d, in + (p + 1) * d);
            }
        } catch (const NumericalError& e) {
            throw NumericalError("trajectory " + std::to_string(i) + " blew up: " + e.what());
        }
    });
    return ds;
}

}  // namespace mno::systems
