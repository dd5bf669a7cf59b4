#include "mno/io/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "mno/core/error.hpp"
#include "mno/io/files.hpp"
#include "mno/io/json_reader.hpp"

namespace mno::io {

using nlohmann::json;

namespace {

bool is_auto(const json& v) { return v.is_string() && v.get<std::string>() == "auto"; }

// number or "auto"; returns nullopt for auto
std::optional<double> number_or_auto(JsonReader& r, const std::string& key, double fallback) {
    if (!r.has(key)) {
        r.get<json>(key, json());
        return fallback;
    }
    const json& v = r.raw(key);
    if (is_auto(v)) return std::nullopt;
    if (!v.is_number()) throw ValidationError("field " + r.field(key) + " must be a number or \"auto\"");
    return v.get<double>();
}

systems::GrfSpec parse_grf(const json& j, const systems::SolverConfig& s) {
    const double len = s.domain_length;
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "ks") return systems::GrfSpec::ks(len);
        if (name == "navier_stokes") return systems::GrfSpec::navier_stokes();
        throw ValidationError("system.grf must be \"ks\", \"navier_stokes\" or an object, got \"" + name + "\"");
    }
    JsonReader r(j, "system.grf");
    const auto preset = r.get<std::string>("preset", s.system == systems::SystemTag::kolmogorov ? "navier_stokes" : "ks");
    systems::GrfSpec g;
    if (preset == "ks") {
        g = systems::GrfSpec::ks(len, r.get<double>("alpha", 2.0), r.get<double>("tau", 7.0));
    } else if (preset == "navier_stokes") {
        g = systems::GrfSpec::navier_stokes();
    } else if (preset == "custom") {
        g.dimension = s.system == systems::SystemTag::kolmogorov ? 2 : 1;
        g.alpha = r.get<double>("alpha");
        g.shift = r.get<double>("shift", 0.0);
        g.prefactor = r.get<double>("prefactor", 1.0);
        g.domain_length = len;
    } else {
        throw ValidationError("system.grf.preset must be ks, navier_stokes or custom");
    }
    r.finish();
    require(g.alpha > 0.0, "system.grf.alpha must be positive");
    require(g.prefactor > 0.0, "system.grf.prefactor must be positive");
    return g;
}

void parse_system(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "system");
    const auto tag = systems::system_from_string(r.get<std::string>("name"));
    const bool has_h = r.has("h");
    const double h = r.get<double>("h", tag == systems::SystemTag::lorenz ? 0.05 : 1.0);
    require(h > 0.0, "system.h must be positive");
    systems::SolverConfig s = tag == systems::SystemTag::ks           ? systems::SolverConfig::ks_default(h)
                              : tag == systems::SystemTag::kolmogorov ? systems::SolverConfig::kolmogorov_default(h)
                                                                      : systems::SolverConfig::lorenz_default();
    if (r.has("dt")) {
        s.dt = r.get<double>("dt");
        require(s.dt > 0.0, "system.dt must be positive");
    } else {
        r.get<json>("dt", json());
    }
    if (has_h) s.sample_stride = static_cast<std::size_t>(std::max(1.0, std::round(h / s.dt)));
    if (r.has("sample_stride")) {
        const auto stride = r.get<std::size_t>("sample_stride");
        if (has_h && stride != s.sample_stride)
            throw ValidationError("system.sample_stride disagrees with system.h / system.dt");
        s.sample_stride = stride;
    } else {
        r.get<json>("sample_stride", json());
    }
    if (has_h && std::abs(s.h() - h) > 1e-12 * h)
        throw ValidationError("system.h must be an integer multiple of system.dt");
    s.reynolds = r.get<double>("reynolds", s.reynolds);
    s.forcing_wavenumber = r.get<int>("forcing_wavenumber", s.forcing_wavenumber);
    s.resolution = r.get<std::size_t>("resolution", s.resolution);
    s.domain_length = r.get<double>("domain_length", s.domain_length);
    if (tag == systems::SystemTag::lorenz) {
        require(s.resolution == 3, "system.resolution must be 3 for lorenz");
        require(!r.has("grf"), "system.grf does not apply to lorenz");
    }
    if (tag == systems::SystemTag::kolmogorov)
        require(std::abs(s.domain_length - 2.0 * std::numbers::pi) < 1e-12,
                "system.domain_length must be 2 pi for kolmogorov");
    s.validate();
    c.solver = s;
    if (tag != systems::SystemTag::lorenz) {
        c.grf = r.has("grf") ? parse_grf(r.raw("grf"), s)
                             : (tag == systems::SystemTag::ks ? systems::GrfSpec::ks(s.domain_length)
                                                              : systems::GrfSpec::navier_stokes());
        if (!r.has("grf")) r.get<json>("grf", json());
    }
    r.finish();
}

void parse_data(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "data");
    DataSection& d = c.data;
    d.n_traj = r.get<std::size_t>("n_traj", d.n_traj);
    d.t_burn = r.get<double>("t_burn", d.t_burn);
    d.t_end = r.get<double>("t_end", d.t_end);
    d.seed = r.get<std::uint64_t>("seed", d.seed);
    r.finish();
    require(d.n_traj >= 1, "data.n_traj must be at least 1");
    require(d.t_burn >= 0.0, "data.t_burn must be >= 0");
    require(d.t_end > d.t_burn, "data.t_end must exceed data.t_burn");
    require(d.t_end - d.t_burn >= c.solver.h() * (1.0 - 1e-9),
            "data.t_end - data.t_burn must cover at least one sample interval system.h");
}

void parse_model(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "model");
    const bool lorenz = c.solver.system == systems::SystemTag::lorenz;
    const auto type = r.get<std::string>("type", lorenz ? "ffn" : "fno");
    const StateShape shape = c.solver.shape();
    json arch;
    const auto scale = number_or_auto(r, "scale", 1.0);
    c.model.auto_scale = !scale;
    if (type == "ffn") {
        require(!shape.is_field(), "model.type ffn needs a vector system (lorenz)");
        const auto in = r.get<std::size_t>("input_dim", shape.n);
        const auto out = r.get<std::size_t>("output_dim", shape.n);
        require(in == shape.n, "model.input_dim must equal the state dimension " + std::to_string(shape.n));
        require(out == shape.n, "model.output_dim must equal the state dimension " + std::to_string(shape.n));
        arch = {{"type", "ffn"},
                {"input_dim", in},
                {"output_dim", out},
                {"hidden_layers", r.get<std::size_t>("hidden_layers", 6)},
                {"hidden_width", r.get<std::size_t>("hidden_width", 150)},
                {"activation", r.get<std::string>("activation", "gelu")}};
    } else if (type == "fno") {
        require(shape.is_field(), "model.type fno needs a field system (ks or kolmogorov)");
        const int dim = r.get<int>("dimension", shape.dimension());
        require(dim == shape.dimension(), "model.dimension must match the system (" +
                                              std::to_string(shape.dimension()) + ")");
        const auto modes = r.get<std::size_t>("modes", 12);
        require(2 * modes <= shape.n, "model.modes (" + std::to_string(modes) + ") exceeds system.resolution / 2 (" +
                                          std::to_string(shape.n / 2) + ")");
        arch = {{"type", "fno"},
                {"dimension", dim},
                {"width", r.get<std::size_t>("width", 32)},
                {"modes", modes},
                {"n_layers", r.get<std::size_t>("n_layers", 4)},
                {"projection_width", r.get<std::size_t>("projection_width", 128)},
                {"activation", r.get<std::string>("activation", "gelu")}};
    } else {
        throw ValidationError("model.type must be ffn or fno, got \"" + type + "\"");
    }
    r.finish();
    arch["residual"] = false;
    arch["scale"] = scale.value_or(1.0);
    model_from_json(arch);  // validates ranges
    c.model.architecture = arch;
}

void parse_training(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "training");
    training::TrainConfig& t = c.training;
    t.sobolev_order = r.get<int>("sobolev_order", t.sobolev_order);
    t.balanced = r.get<bool>("balanced", t.balanced);
    t.learning_rate = r.get<double>("learning_rate", t.learning_rate);
    t.epochs = r.get<std::size_t>("epochs", t.epochs);
    t.halving_period = r.get<std::size_t>("halving_period", t.halving_period);
    t.batch_size = r.get<std::size_t>("batch_size", t.batch_size);
    t.seed = r.get<std::uint64_t>("seed", t.seed);
    t.residual_mode = r.get<bool>("residual_mode", t.residual_mode);
    t.validation_fraction = r.get<double>("validation_fraction", t.validation_fraction);
    if (r.has("dissipativity")) {
        JsonReader d(r.raw("dissipativity"), "training.dissipativity");
        auto& ds = t.dissipativity;
        ds.enabled = d.get<bool>("enabled", true);
        ds.weight = d.get<double>("weight", ds.weight);
        ds.lambda = d.get<double>("lambda", ds.lambda);
        ds.samples_per_batch = d.get<std::size_t>("samples_per_batch", ds.samples_per_batch);
        const auto inner = number_or_auto(d, "shell_inner", ds.shell_inner);
        const auto outer = number_or_auto(d, "shell_outer", ds.shell_outer);
        if (inner.has_value() != outer.has_value())
            throw ValidationError("training.dissipativity.shell_inner and shell_outer must both be numbers or both \"auto\"");
        c.auto_shell = !inner;
        if (inner) {
            ds.shell_inner = *inner;
            ds.shell_outer = *outer;
            require(*inner > 0.0, "training.dissipativity.shell_inner must be positive");
            require(*inner < *outer, "training.dissipativity.shell_outer must exceed shell_inner");
        }
        d.finish();
        require(ds.weight >= 0.0, "training.dissipativity.weight must be >= 0");
        require(ds.lambda > 0.0 && ds.lambda < 1.0, "training.dissipativity.lambda must lie in (0, 1)");
    } else {
        r.get<json>("dissipativity", json());
    }
    r.finish();
    t.validate();
    if (!c.solver.shape().is_field()) require(t.sobolev_order == 0, "training.sobolev_order must be 0 for vector states");
    c.model.architecture["residual"] = t.residual_mode;
}

void parse_postprocess(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "postprocess");
    auto& p = c.postprocess;
    p.enabled = r.get<bool>("enabled", true);
    const auto alpha = number_or_auto(r, "alpha", p.cfg.alpha);
    const auto beta = number_or_auto(r, "beta", p.cfg.beta);
    p.auto_radius = !alpha;
    if (p.auto_radius) {
        require(!beta || !r.has("beta"), "postprocess.beta must be \"auto\" or absent when postprocess.alpha is \"auto\"");
    } else {
        require(beta.has_value(), "postprocess.beta may only be \"auto\" together with postprocess.alpha");
        p.cfg.alpha = *alpha;
        p.cfg.beta = *beta;
    }
    p.cfg.lambda = r.get<double>("lambda", c.training.dissipativity.lambda);
    r.finish();
    if (!p.auto_radius) {
        require(p.cfg.alpha > 0.0, "postprocess.alpha must be positive");
        require(p.cfg.beta > 0.0, "postprocess.beta must be positive");
    }
    require(p.cfg.lambda > 0.0 && p.cfg.lambda < 1.0, "postprocess.lambda must lie in (0, 1)");
    if (c.training.dissipativity.enabled)
        require(p.cfg.lambda == c.training.dissipativity.lambda,
                "postprocess.lambda must equal training.dissipativity.lambda");
}

void parse_analysis(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "analysis");
    auto& a = c.analysis;
    a.rollout_steps = r.get<std::size_t>("rollout_steps", a.rollout_steps);
    a.perturb_scale = r.get<double>("perturb_scale", a.perturb_scale);
    if (r.has("blowup_bound")) {
        a.blowup_bound = r.get<double>("blowup_bound");
    } else {
        r.get<json>("blowup_bound", json());
    }
    if (r.has("burn_in")) {
        a.burn_in = r.get<std::size_t>("burn_in");
    } else {
        r.get<json>("burn_in", json());
    }
    if (r.has("which")) {
        const json& w = r.raw("which");
        a.which = w.is_string() ? std::vector<std::string>{w.get<std::string>()}
                                : r.get<std::vector<std::string>>("which");
    }
    a.spectrum_quantity = r.get<std::string>("spectrum_quantity", a.spectrum_quantity);
    a.pod_rank = r.get<std::size_t>("pod_rank", a.pod_rank);
    a.histogram_bins = r.get<std::size_t>("histogram_bins", a.histogram_bins);
    a.max_lag = r.get<std::size_t>("max_lag", a.max_lag);
    r.finish();
    require(std::isfinite(a.perturb_scale) && a.perturb_scale != 0.0, "analysis.perturb_scale must be finite and nonzero");
    require(a.blowup_bound > 0.0, "analysis.blowup_bound must be positive");
    require(a.histogram_bins >= 1, "analysis.histogram_bins must be at least 1");
    require(a.pod_rank >= 1, "analysis.pod_rank must be at least 1");
    require(a.spectrum_quantity == "vorticity" || a.spectrum_quantity == "velocity",
            "analysis.spectrum_quantity must be vorticity or velocity");
    require(a.spectrum_quantity == "vorticity" || c.solver.system == systems::SystemTag::kolmogorov,
            "analysis.spectrum_quantity velocity needs the kolmogorov system");
    const auto& names = statistic_names();
    for (const auto& w : a.which)
        require(w == "all" || std::find(names.begin(), names.end(), w) != names.end(),
                "analysis.which: unknown statistic \"" + w + "\"");
}

void parse_gradcheck(const json& j, ExperimentConfig& c) {
    JsonReader r(j, "gradcheck");
    auto& g = c.gradcheck;
    g.batch = r.get<std::size_t>("batch", g.batch);
    g.tolerance = r.get<double>("tolerance", g.tolerance);
    g.spectral_boost = r.get<double>("spectral_boost", g.spectral_boost);
    g.corrupt_adjoint = r.get<bool>("corrupt_adjoint", g.corrupt_adjoint);
    r.finish();
    require(g.batch >= 1, "gradcheck.batch must be at least 1");
    require(g.tolerance > 0.0, "gradcheck.tolerance must be positive");
}

}  // namespace

const std::vector<std::string>& statistic_names() {
    static const std::vector<std::string> names = {"energy",    "spectrum", "correlation", "autocorrelation",
                                                   "histogram", "pod",      "flow"};
    return names;
}

json system_to_json(const systems::SolverConfig& s, const systems::GrfSpec& g) {
    json j = {{"name", systems::to_string(s.system)}, {"dt", s.dt}, {"sample_stride", s.sample_stride}};
    if (s.system == systems::SystemTag::lorenz) return j;
    j["resolution"] = s.resolution;
    j["domain_length"] = s.domain_length;
    if (s.system == systems::SystemTag::kolmogorov) {
        j["reynolds"] = s.reynolds;
        j["forcing_wavenumber"] = s.forcing_wavenumber;
    }
    j["grf"] = {{"preset", "custom"}, {"alpha", g.alpha}, {"shift", g.shift}, {"prefactor", g.prefactor}};
    return j;
}

ExperimentConfig system_from_json(const json& system) {
    ExperimentConfig c;
    parse_system(system, c);
    return c;
}

ExperimentConfig parse_config(const json& j) {
    JsonReader r(j, "");
    ExperimentConfig c;
    parse_system(r.raw("system"), c);
    const json empty = json::object();
    parse_data(r.has("data") ? r.raw("data") : empty, c);
    parse_model(r.has("model") ? r.raw("model") : empty, c);
    parse_training(r.has("training") ? r.raw("training") : empty, c);
    parse_postprocess(r.has("postprocess") ? r.raw("postprocess") : json{{"enabled", false}}, c);
    parse_analysis(r.has("analysis") ? r.raw("analysis") : empty, c);
    parse_gradcheck(r.has("gradcheck") ? r.raw("gradcheck") : empty, c);
    for (const char* k : {"data", "model", "training", "postprocess", "analysis", "gradcheck"}) r.get<json>(k, json());
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": invalid JSON (" + e.what() + ")");
    }
    return parse_config(j);
}

systems::GenerateRequest ExperimentConfig::generate_request() const {
    systems::GenerateRequest req;
    req.solver = solver;
    req.grf = grf;
    req.n_traj = data.n_traj;
    req.t_burn = data.t_burn;
    req.t_end = data.t_end;
    req.seed = data.seed;
    return req;
}

model::Model ExperimentConfig::build_model(double max_norm) const {
    json arch = model.architecture;
    if (model.auto_scale) {
        require(max_norm > 0.0 && std::isfinite(max_norm), "model.scale \"auto\" needs a positive data norm");
        arch["scale"] = max_norm;
    }
    return model_from_json(arch);
}

training::TrainConfig ExperimentConfig::resolved_training(double max_norm) const {
    training::TrainConfig t = training;
    if (solver.shape().is_field()) t.dissipativity.direction = grf;
    if (auto_shell && t.dissipativity.enabled) {
        t.dissipativity.shell_inner = max_norm / t.dissipativity.lambda;
        t.dissipativity.shell_outer = 1.3 * t.dissipativity.shell_inner;
    }
    return t;
}

dissipativity::PostProcessConfig ExperimentConfig::resolved_postprocess(double max_norm) const {
    if (!postprocess.auto_radius) return postprocess.cfg;
    return dissipativity::PostProcessConfig::from_max_norm(max_norm, postprocess.cfg.lambda);
}

}  // namespace mno::io
