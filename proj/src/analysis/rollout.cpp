#include "mno/analysis/rollout.hpp"

#include <cmath>
#include <sstream>

#include "mno/core/error.hpp"

namespace mno::analysis {

StepFn model_step(const model::Model& m, const model::ModelParams& params, const StateShape& shape) {
    m.check_shape(shape);
    return [&m, &params, shape](std::span<const double> in, std::span<double> out) {
        m.forward(params, shape, in, 1, out);
    };
}

StepFn solver_step(systems::Solver& solver) {
    return [&solver](std::span<const double> in, std::span<double> out) { solver.step(in, out); };
}

RolloutResult rollout(const StepFn& step, const StateShape& shape, std::span<const double> u0, std::size_t n,
                      const RolloutOptions& opt, double h, const std::string& provenance) {
    require(u0.size() == shape.size(), "rollout: initial state has the wrong size");
    RolloutResult res;
    res.trajectory.shape = shape;
    res.trajectory.h = h;
    res.trajectory.provenance = provenance;
    res.trajectory.snapshots.reserve((n + 1) * u0.size());
    std::vector<double> u(u0.begin(), u0.end()), next(u0.size());
    for (double& x : u) x *= opt.perturb_scale;
    res.trajectory.push(u);
    for (std::size_t k = 1; k <= n; ++k) {
        std::string why;
        try {
            step(u, next);
        } catch (const NumericalError& e) {
            why = e.what();
        }
        if (why.empty()) {
            if (!all_finite(next)) {
                why = "non-finite state";
            } else {
                const double nrm = state_norm(shape, next);
                if (nrm > opt.blowup_bound) {
                    std::ostringstream os;
                    os << "state norm " << nrm << " exceeds the bound " << opt.blowup_bound;
                    why = os.str();
                }
            }
        }
        if (!why.empty()) {
            res.blew_up = true;
            res.blowup_step = k;
            res.message = "blow-up at step " + std::to_string(k) + ": " + why;
            return res;
        }
        std::swap(u, next);
        res.trajectory.push(u);
    }
    return res;
}

double per_step_error(const StepFn& step, const PairDataset& data) {
    require(data.count() > 0, "per-step error needs a non-empty dataset");
    std::vector<double> y(data.shape.size()), e(y.size());
    double total = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        step(data.input(i), y);
        const auto t = data.output(i);
        for (std::size_t k = 0; k < y.size(); ++k) e[k] = y[k] - t[k];
        total += state_norm(data.shape, e) / state_norm(data.shape, t);
    }
    return total / static_cast<double>(data.count());
}

double composition_error(const StepFn& step, const Trajectory& reference, std::size_t n, std::size_t stride) {
    require(n >= 1 && stride >= 1, "composition error needs n >= 1 and stride >= 1");
    require(reference.length() > n, "reference trajectory shorter than the composition length");
    const StateShape& s = reference.shape;
    std::vector<double> u(s.size()), next(s.size()), e(s.size());
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + n < reference.length(); i += stride) {
        const auto u0 = reference.snapshot(i);
        u.assign(u0.begin(), u0.end());
        for (std::size_t k = 0; k < n; ++k) {
            step(u, next);
            std::swap(u, next);
        }
        const auto t = reference.snapshot(i + n);
        for (std::size_t k = 0; k < u.size(); ++k) e[k] = u[k] - t[k];
        total += state_norm(s, e) / state_norm(s, t);
        ++count;
    }
    return total / static_cast<double>(count);
}

Trajectory trajectory_from_pairs(const PairDataset& data, std::size_t index) {
    require(data.pairs_per_traj > 0 && index < data.n_traj, "trajectory index out of range");
    Trajectory t;
    t.shape = data.shape;
    t.h = data.h;
    t.provenance = data.system;
    const std::size_t first = index * data.pairs_per_traj;
    t.push(data.input(first));
    for (std::size_t i = 0; i < data.pairs_per_traj; ++i) t.push(data.output(first + i));
    return t;
}

}  // namespace mno::analysis
