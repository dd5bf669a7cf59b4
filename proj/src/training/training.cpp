#include "mno/training/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mno/core/error.hpp"
#include "mno/core/parallel.hpp"
#include "mno/simd/kernels.hpp"

namespace mno::training {

using model::GradientBuffer;
using model::Model;
using model::ModelParams;

void DissipativityConfig::validate() const {
    if (!enabled) return;
    require(weight >= 0.0, "dissipativity.weight must be >= 0");
    require(lambda > 0.0 && lambda < 1.0, "dissipativity.lambda must lie in (0, 1)");
    require(shell_inner > 0.0 && shell_inner < shell_outer,
            "dissipativity shell radii must satisfy 0 < shell_inner < shell_outer");
}

void TrainConfig::validate() const {
    require(learning_rate > 0.0, "training.learning_rate must be > 0");
    require(epochs >= 1, "training.epochs must be >= 1");
    require(batch_size >= 1, "training.batch_size must be >= 1");
    require(sobolev_order >= 0 && sobolev_order <= 4, "training.sobolev_order must be in 0..4");
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "training.validation_fraction must be in [0, 1)");
    dissipativity.validate();
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
    if (cfg.halving_period == 0) return cfg.learning_rate;
    return std::ldexp(cfg.learning_rate, -static_cast<int>(epoch / cfg.halving_period));
}

std::vector<double> unit_direction(Rng& rng, const StateShape& shape, const systems::GrfSpec& grf) {
    std::vector<double> u;
    if (shape.is_field()) {
        require(grf.dimension == shape.dimension(), "shell direction GRF has the wrong dimension");
        u = systems::grf_sample(grf, shape.n, rng).values;
    } else {
        u.resize(shape.size());
        fill_standard_normal(rng, u);
    }
    const double norm = state_norm(shape, u);
    if (norm == 0.0) throw NumericalError("shell direction with zero norm");
    for (double& x : u) x /= norm;
    return u;
}

std::vector<double> shell_sample(Rng& rng, const DissipativityConfig& cfg, const StateShape& shape) {
    std::vector<double> u = unit_direction(rng, shape, cfg.direction);
    const double radius = uniform(rng, cfg.shell_inner, cfg.shell_outer);
    for (double& x : u) x *= radius;
    return u;
}

std::vector<double> shell_batch(Rng& rng, const DissipativityConfig& cfg, const StateShape& shape,
                                std::size_t count) {
    std::vector<double> out;
    out.reserve(count * shape.size());
    for (std::size_t i = 0; i < count; ++i) {
        const auto u = shell_sample(rng, cfg, shape);
        out.insert(out.end(), u.begin(), u.end());
    }
    return out;
}

namespace {

// fixed chunking keeps the summation order independent of the worker count
std::size_t chunk_size(const StateShape& shape) {
    return std::clamp<std::size_t>(8192 / shape.size(), 1, 64);
}

struct Chunk {
    double data = 0.0;
    double reg = 0.0;
    GradientBuffer grad;
};

// kind 0: data pairs, kind 1: shell samples
struct Task {
    int kind;
    std::size_t begin;
    std::size_t count;
};

}  // namespace

LossValue total_loss(const Model& m, const ModelParams& params, const StateShape& shape,
                     std::span<const double> inputs, std::span<const double> targets, std::span<const double> shell,
                     const spectral::SobolevSpec& sobolev, const DissipativityConfig& diss, GradientBuffer* grad) {
    const std::size_t d = shape.size();
    require(d > 0 && inputs.size() % d == 0 && inputs.size() == targets.size(), "loss: batch size mismatch");
    const std::size_t nb = inputs.size() / d;
    const bool use_reg = diss.enabled && !shell.empty();
    require(shell.size() % d == 0, "loss: shell batch size mismatch");
    const std::size_t ns = use_reg ? shell.size() / d : 0;
    require(nb > 0 || ns > 0, "loss needs a non-empty batch");

    const std::size_t cs = chunk_size(shape);
    std::vector<Task> tasks;
    for (std::size_t b = 0; b < nb; b += cs) tasks.push_back({0, b, std::min(cs, nb - b)});
    for (std::size_t b = 0; b < ns; b += cs) tasks.push_back({1, b, std::min(cs, ns - b)});

    std::vector<Chunk> chunks(tasks.size());
    const double point_weight = shape.is_field() ? 1.0 / static_cast<double>(d) : 1.0;
    parallel_for(tasks.size(), [&](std::size_t ti) {
        const Task& t = tasks[ti];
        Chunk& c = chunks[ti];
        const std::size_t n = t.count * d;
        const std::span<const double> in = (t.kind == 0 ? inputs : shell).subspan(t.begin * d, n);
        std::vector<double> out(n), dout(grad ? n : 0);
        model::Tape tape;
        m.forward(params, shape, in, t.count, out, grad ? &tape : nullptr);
        for (std::size_t i = 0; i < t.count; ++i) {
            const auto o = std::span<const double>(out).subspan(i * d, d);
            if (t.kind == 0) {
                const auto truth = targets.subspan((t.begin + i) * d, d);
                if (grad) {
                    auto g = std::span<double>(dout).subspan(i * d, d);
                    c.data += spectral::relative_sobolev_loss_grad(shape, o, truth, sobolev, g);
                    for (double& x : g) x /= static_cast<double>(nb);
                } else {
                    c.data += spectral::relative_sobolev_loss(shape, o, truth, sobolev);
                }
            } else {
                const auto v = in.subspan(i * d, d);
                double sq = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double r = o[k] - diss.lambda * v[k];
                    sq += r * r;
                    if (grad) dout[i * d + k] = diss.weight * 2.0 * r * point_weight / static_cast<double>(ns);
                }
                c.reg += sq * point_weight;
            }
        }
        if (grad) {
            c.grad = GradientBuffer(params.layout);
            m.backward(params, tape, dout, c.grad);
        }
    });

    LossValue lv;
    for (const Chunk& c : chunks) {
        lv.data += c.data;
        lv.regularization += c.reg;
    }
    if (nb > 0) lv.data /= static_cast<double>(nb);
    if (ns > 0) lv.regularization /= static_cast<double>(ns);
    lv.total = lv.data + (use_reg ? diss.weight * lv.regularization : 0.0);
    if (grad) {
        require(grad->layout == params.layout, "gradient buffer does not match the parameters");
        grad->zero();
        for (const Chunk& c : chunks)
            for (std::size_t i = 0; i < grad->values.size(); ++i) grad->values[i] += c.grad.values[i];
    }
    return lv;
}

double data_loss(const Model& m, const ModelParams& params, const StateShape& shape, std::span<const double> inputs,
                 std::span<const double> targets, const spectral::SobolevSpec& sobolev) {
    return total_loss(m, params, shape, inputs, targets, {}, sobolev, DissipativityConfig{}, nullptr).data;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
    require(params.size() == grads.size() && state.m.size() == params.size() && state.v.size() == params.size(),
            "adam: size mismatch");
    ++state.t;
    const double t = static_cast<double>(state.t);
    const simd::AdamCoefficients c{lr, adam_beta1, adam_beta2, adam_eps, 1.0 - std::pow(adam_beta1, t),
                                   1.0 - std::pow(adam_beta2, t)};
    simd::adam_update(params.size(), params.data(), grads.data(), state.m.data(), state.v.data(), c);
}

double max_state_norm(const PairDataset& data) {
    double mx = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) mx = std::max(mx, state_norm(data.shape, data.input(i)));
    return mx;
}

TrainResult train(const PairDataset& data, Model& m, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    m.set_residual(cfg.residual_mode);
    m.check_shape(data.shape);
    const std::size_t d = data.shape.size();
    const std::size_t total = data.count();
    require(total > 0, "training needs a non-empty dataset");
    require(data.outputs.size() == data.inputs.size(), "dataset inputs and outputs differ in size");
    if (cfg.dissipativity.enabled && data.shape.is_field())
        cfg.dissipativity.direction.validate();

    std::size_t n_traj = data.n_traj, per = data.pairs_per_traj;
    if (n_traj == 0 || per == 0 || n_traj * per != total) {
        n_traj = 1;
        per = total;
    }
    const std::size_t n_val_traj =
        n_traj >= 2 ? static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n_traj))) : 0;
    TrainResult res;
    res.validation_pairs = n_val_traj * per;
    res.train_pairs = total - res.validation_pairs;
    const std::size_t nt = res.train_pairs;

    ModelParams params = m.init(cfg.seed);
    GradientBuffer grad(params.layout);
    AdamState adam(params.values.size());
    Rng shuffle_rng(stream_seed(cfg.seed, 1));
    Rng shell_rng(stream_seed(cfg.seed, 2));
    const spectral::SobolevSpec sob = cfg.sobolev();
    spectral::validate(sob, data.shape);

    std::vector<std::size_t> order(nt);
    std::vector<double> xin, xout;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < nt; ++i) order[i] = i;
        for (std::size_t i = nt; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);
        const double lr = learning_rate(cfg, epoch);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = lr;
        std::size_t batch_index = 0;
        for (std::size_t b = 0; b < nt; b += cfg.batch_size, ++batch_index) {
            const std::size_t count = std::min(cfg.batch_size, nt - b);
            xin.resize(count * d);
            xout.resize(count * d);
            for (std::size_t i = 0; i < count; ++i) {
                const auto u = data.input(order[b + i]);
                const auto v = data.output(order[b + i]);
                std::copy(u.begin(), u.end(), xin.begin() + i * d);
                std::copy(v.begin(), v.end(), xout.begin() + i * d);
            }
            std::vector<double> shell;
            if (cfg.dissipativity.enabled) {
                const std::size_t ns =
                    cfg.dissipativity.samples_per_batch ? cfg.dissipativity.samples_per_batch : count;
                shell = shell_batch(shell_rng, cfg.dissipativity, data.shape, ns);
            }
            const auto where = [&] {
                std::ostringstream os;
                os << "epoch " << epoch << ", batch " << batch_index;
                return os.str();
            };
            LossValue lv;
            try {
                lv = total_loss(m, params, data.shape, xin, xout, shell, sob, cfg.dissipativity, &grad);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at " + where());
            }
            if (!std::isfinite(lv.total) || !all_finite(grad.values))
                throw NumericalError("non-finite loss at " + where());
            adam_step(params.values, grad.values, adam, lr);
            const double w = static_cast<double>(count) / static_cast<double>(nt);
            rec.train_loss += w * lv.total;
            rec.data_loss += w * lv.data;
            rec.regularization += w * lv.regularization;
        }
        if (res.validation_pairs > 0) {
            const std::size_t off = nt * d, len = res.validation_pairs * d;
            rec.validation_loss = data_loss(m, params, data.shape, std::span(data.inputs).subspan(off, len),
                                            std::span(data.outputs).subspan(off, len), sob);
        }
        res.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    res.params = std::move(params);
    return res;
}

GradCheckReport grad_check(const Model& m, const StateShape& shape, const GradCheckOptions& opt, std::uint64_t seed) {
    m.check_shape(shape);
    GradCheckReport rep;
    rep.tolerance = opt.tolerance;
    ModelParams p = m.init(seed);
    for (const auto& b : p.layout.blocks())
        if (b.complex)
            for (double& v : p.block(b)) v *= opt.spectral_boost;

    Rng rng(stream_seed(seed, 7));
    const std::size_t d = shape.size(), nb = std::max<std::size_t>(opt.batch, 1);
    std::vector<double> in(nb * d), out(nb * d);
    if (shape.is_field()) {
        const systems::GrfSpec g = shape.dimension() == 2 ? systems::GrfSpec::navier_stokes()
                                                          : systems::GrfSpec::ks(shape.domain_length);
        for (std::size_t i = 0; i < nb; ++i) {
            auto u = systems::grf_sample(g, shape.n, rng).values;
            auto v = systems::grf_sample(g, shape.n, rng).values;
            const double su = m.scale() / state_norm(shape, u), sv = m.scale() / state_norm(shape, v);
            for (std::size_t k = 0; k < d; ++k) {
                in[i * d + k] = su * u[k];
                out[i * d + k] = sv * v[k];
            }
        }
    } else {
        fill_standard_normal(rng, in);
        fill_standard_normal(rng, out);
        for (double& x : in) x *= m.scale();
        for (double& x : out) x *= m.scale();
    }
    DissipativityConfig diss = opt.dissipativity;
    if (diss.enabled && shape.is_field() && diss.direction.dimension != shape.dimension())
        diss.direction = shape.dimension() == 2 ? systems::GrfSpec::navier_stokes()
                                                : systems::GrfSpec::ks(shape.domain_length);
    std::vector<double> shell;
    if (diss.enabled) shell = shell_batch(rng, diss, shape, nb);

    GradientBuffer g(p.layout);
    total_loss(m, p, shape, in, out, shell, opt.sobolev, diss, &g);
    if (opt.corrupt_adjoint) {
        // a 1e-3 relative error in the spectral (or first) block
        const auto& blocks = p.layout.blocks();
        auto it = std::find_if(blocks.begin(), blocks.end(), [](const auto& b) { return b.complex; });
        const auto& b = it == blocks.end() ? blocks.front() : *it;
        for (double& v : g.block(b)) v *= 1.001;
    }

    for (const auto& b : p.layout.blocks()) {
        GradCheckBlock blk;
        blk.name = b.name;
        double gmax = 0.0;
        for (std::size_t i = b.offset; i < b.offset + b.count; ++i) {
            const double keep = p.values[i];
            const double h = 1e-6 * std::max(1.0, std::abs(keep));
            p.values[i] = keep + h;
            const double up = total_loss(m, p, shape, in, out, shell, opt.sobolev, diss, nullptr).total;
            p.values[i] = keep - h;
            const double dn = total_loss(m, p, shape, in, out, shell, opt.sobolev, diss, nullptr).total;
            p.values[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            blk.max_abs_error = std::max(blk.max_abs_error, std::abs(fd - g.values[i]));
            gmax = std::max(gmax, std::abs(g.values[i]));
            ++blk.checked;
        }
        blk.rel_error = blk.max_abs_error / std::max(gmax, 1e-300);
        rep.max_rel_error = std::max(rep.max_rel_error, blk.rel_error);
        rep.blocks.push_back(blk);
    }
    rep.passed = rep.max_rel_error < opt.tolerance;
    return rep;
}

}  // namespace mno::training
