#include "mno/cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mno/analysis/rollout.hpp"
#include "mno/core/error.hpp"
#include "mno/io/config.hpp"
#include "mno/io/files.hpp"

namespace mno::cli {

using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    io::atomic_write(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string csv_path(const std::string& report_path, const std::string& entry) {
    std::filesystem::path p(report_path);
    p.replace_extension();
    return p.string() + "." + entry + ".csv";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json record_to_json(const training::EpochRecord& r) {
    json j = {{"epoch", r.epoch},
              {"learning_rate", r.learning_rate},
              {"train_loss", r.train_loss},
              {"data_loss", r.data_loss},
              {"regularization", r.regularization}};
    j["validation_loss"] = std::isnan(r.validation_loss) ? json(nullptr) : json(r.validation_loss);
    return j;
}

json train_summary(const training::TrainConfig& t) {
    return {{"sobolev_order", t.sobolev_order},
            {"balanced", t.balanced},
            {"learning_rate", t.learning_rate},
            {"epochs", t.epochs},
            {"halving_period", t.halving_period},
            {"batch_size", t.batch_size},
            {"seed", t.seed},
            {"residual_mode", t.residual_mode},
            {"validation_fraction", t.validation_fraction},
            {"dissipativity",
             {{"enabled", t.dissipativity.enabled},
              {"weight", t.dissipativity.weight},
              {"lambda", t.dissipativity.lambda},
              {"shell_inner", t.dissipativity.shell_inner},
              {"shell_outer", t.dissipativity.shell_outer},
              {"samples_per_batch", t.dissipativity.samples_per_batch}}}};
}

void check_dataset_matches(const PairDataset& d, const io::ExperimentConfig& c, const std::string& path) {
    const StateShape want = c.solver.shape();
    if (d.system != systems::to_string(c.solver.system) || !(d.shape == want))
        throw ValidationError(path + " holds " + d.system + " states of size " + std::to_string(d.shape.size()) +
                              ", config expects " + systems::to_string(c.solver.system) + " states of size " +
                              std::to_string(want.size()));
    if (std::abs(d.h - c.solver.h()) > 1e-12 * c.solver.h())
        throw ValidationError(path + " was sampled at h = " + fmt(d.h) + ", config system.h is " + fmt(c.solver.h()));
}

// ---- generate

int cmd_generate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
                 const std::string& layout) {
    io::ExperimentConfig c = io::load_config(config);
    if (seed) c.data.seed = *seed;
    const auto req = c.generate_request();
    const PairDataset d = systems::generate_dataset(req);
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < d.count(); ++i) {
        const double n = state_norm(d.shape, d.input(i));
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    if (layout == "trajectory") {
        require(c.data.n_traj == 1, "--layout trajectory needs data.n_traj = 1");
        io::TrajectoryFile t;
        t.trajectory = analysis::trajectory_from_pairs(d, 0);
        t.trajectory.provenance = "solver";
        t.system = d.system;
        t.seed = d.seed;
        t.meta = {{"system", io::system_to_json(c.solver, c.grf)}};
        io::write_trajectory(out, t);
        std::printf("wrote %s: trajectory of %zu snapshots, state norm in [%.6g, %.6g]\n", out.c_str(),
                    t.trajectory.length(), lo, hi);
    } else {
        io::write_dataset(out, d);
        std::printf("wrote %s: %zu pairs from %zu trajectories, input norm in [%.6g, %.6g]\n", out.c_str(), d.count(),
                    d.n_traj, lo, hi);
    }
    return 0;
}

// ---- train

int cmd_train(const std::string& config, const std::string& data_path, const std::string& out,
              std::string history_path, std::optional<std::uint64_t> seed) {
    io::ExperimentConfig c = io::load_config(config);
    if (seed) c.training.seed = *seed;
    const PairDataset d = io::read_dataset(data_path);
    check_dataset_matches(d, c, data_path);
    const double max_norm = training::max_state_norm(d);
    model::Model m = c.build_model(max_norm);
    const training::TrainConfig tc = c.resolved_training(max_norm);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = training::train(d, m, tc, [&](const training::EpochRecord& r) {
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("epoch %zu  lr %.3g  loss %.6e  data %.6e  reg %.6e  (%.1fs)\n", r.epoch, r.learning_rate,
                    r.train_loss, r.data_loss, r.regularization, el);
        std::fflush(stdout);
    });

    json history = json::array();
    for (const auto& r : res.history) history.push_back(record_to_json(r));
    const auto& last = res.history.back();
    io::Checkpoint ck;
    ck.architecture = io::architecture_to_json(m);
    ck.params = res.params;
    ck.info = {{"system", io::system_to_json(c.solver, c.grf)},
               {"h", d.h},
               {"max_train_norm", max_norm},
               {"training", train_summary(tc)},
               {"train_pairs", res.train_pairs},
               {"validation_pairs", res.validation_pairs},
               {"final", record_to_json(last)}};
    const auto pp = c.resolved_postprocess(max_norm);
    ck.info["postprocess"] = {{"enabled", c.postprocess.enabled},
                              {"alpha", pp.alpha},
                              {"beta", pp.beta},
                              {"lambda", pp.lambda}};
    io::write_checkpoint(out, ck);
    if (history_path.empty()) history_path = out + ".history.json";
    write_text(history_path, history.dump(1) + "\n");
    std::printf("wrote %s and %s\n", out.c_str(), history_path.c_str());
    return 0;
}

// ---- rollout

struct LoadedModel {
    io::Checkpoint ck;
    model::Model model;
    io::ExperimentConfig system;
};

LoadedModel load_model(const std::string& path) {
    io::Checkpoint ck = io::read_checkpoint(path);
    model::Model m = io::model_from_json(ck.architecture);
    if (!ck.info.contains("system")) throw IoError(path + ": checkpoint has no system description");
    io::ExperimentConfig sys = io::system_from_json(ck.info["system"]);
    return {std::move(ck), std::move(m), std::move(sys)};
}

std::vector<double> initial_state(const std::string& init, const io::ExperimentConfig& sys, std::uint64_t seed,
                                  double burn, std::size_t index) {
    const StateShape shape = sys.solver.shape();
    if (init == "sample") {
        Rng rng(stream_seed(seed, 11));
        std::vector<double> u = systems::sample_initial_condition(sys.solver, sys.grf, rng);
        if (burn > 0.0) {
            systems::Solver s(sys.solver);
            s.set_state(u);
            s.advance(static_cast<std::size_t>(std::llround(burn / sys.solver.h())));
            s.get_state(u);
        }
        return u;
    }
    const std::string layout = io::dataset_layout(init);
    std::vector<double> u;
    StateShape got;
    if (layout == "trajectory") {
        const auto t = io::read_trajectory(init);
        require(index < t.trajectory.length(), "--index beyond the end of " + init);
        got = t.trajectory.shape;
        const auto s = t.trajectory.snapshot(index);
        u.assign(s.begin(), s.end());
    } else {
        const auto d = io::read_dataset(init);
        require(index < d.count(), "--index beyond the end of " + init);
        got = d.shape;
        const auto s = d.input(index);
        u.assign(s.begin(), s.end());
    }
    require(got == shape, init + " holds states of a different shape than the model's system");
    return u;
}

int cmd_rollout(const std::string& model_path, std::size_t steps, const std::string& init, double perturb,
                const std::string& postprocess, const std::string& out, std::uint64_t seed, double burn,
                std::size_t index, double bound) {
    LoadedModel lm = load_model(model_path);
    const StateShape shape = lm.system.solver.shape();
    lm.model.check_shape(shape);
    analysis::StepFn step = analysis::model_step(lm.model, lm.ck.params, shape);
    const bool pp = postprocess == "on";
    json pp_json = nullptr;
    if (pp) {
        const json& p = lm.ck.info.at("postprocess");
        dissipativity::PostProcessConfig cfg{p.at("alpha").get<double>(), p.at("beta").get<double>(),
                                             p.at("lambda").get<double>()};
        cfg.validate();
        step = dissipativity::post_processed(step, shape, cfg);
        pp_json = p;
    }
    const std::vector<double> u0 = initial_state(init, lm.system, seed, burn, index);
    analysis::RolloutOptions opt;
    opt.perturb_scale = perturb;
    opt.blowup_bound = bound;
    const auto res = analysis::rollout(step, shape, u0, steps, opt, lm.system.solver.h(), "model:" + model_path);

    io::TrajectoryFile t;
    t.trajectory = res.trajectory;
    t.system = systems::to_string(lm.system.solver.system);
    t.seed = seed;
    t.meta = {{"system", lm.ck.info["system"]}, {"steps", steps},     {"perturb", perturb},
              {"postprocess", pp_json},         {"init", init},       {"blew_up", res.blew_up},
              {"blowup_step", res.blowup_step}, {"model", model_path}};
    io::write_trajectory(out, t);
    double mx = 0.0;
    for (std::size_t i = 0; i < t.trajectory.length(); ++i) mx = std::max(mx, state_norm(shape, t.trajectory.snapshot(i)));
    if (res.blew_up) {
        std::fprintf(stderr, "rollout blew up at step %zu: %s (partial trajectory written to %s)\n", res.blowup_step,
                     res.message.c_str(), out.c_str());
        return static_cast<int>(ExitCode::numerical);
    }
    std::printf("wrote %s: %zu snapshots, max state norm %.6g\n", out.c_str(), t.trajectory.length(), mx);
    return 0;
}

// ---- stats

int cmd_stats(const std::string& traj_path, const std::string& ref_path, const std::string& out, StatsOptions opt) {
    const io::TrajectoryFile t = io::read_trajectory(traj_path);
    std::optional<io::TrajectoryFile> r;
    if (!ref_path.empty()) r = io::read_trajectory(ref_path);
    if (opt.reynolds == 0.0 && t.meta.contains("system")) {
        const json& s = t.meta["system"];
        if (s.contains("reynolds")) opt.reynolds = s["reynolds"].get<double>();
    }
    const StatsReport rep = statistics_report(t.trajectory, r ? &r->trajectory : nullptr, opt);
    json j = rep.to_json();
    j["trajectory"] = traj_path;
    j["snapshots"] = t.trajectory.length();
    if (r) j["reference"] = ref_path;
    write_text(out, j.dump(1) + "\n");
    for (const auto& e : rep.entries) {
        std::ostringstream csv;
        for (std::size_t i = 0; i < e.csv_header.size(); ++i) csv << (i ? "," : "") << e.csv_header[i];
        csv << "\n";
        for (const auto& row : e.csv_rows) {
            for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << fmt(row[i]);
            csv << "\n";
        }
        write_text(csv_path(out, e.name), csv.str());
    }
    std::printf("wrote %s with %zu entries\n", out.c_str(), rep.entries.size());
    for (const auto& [k, v] : rep.discrepancies.items()) std::printf("  %s discrepancy %s\n", k.c_str(), v.dump().c_str());
    return 0;
}

// ---- gradcheck

int cmd_gradcheck(const std::string& config, std::uint64_t seed, bool corrupt, const std::string& out) {
    const io::ExperimentConfig c = io::load_config(config);
    const model::Model m = c.build_model(1.0);
    const StateShape shape = c.solver.shape();
    training::GradCheckOptions opt;
    opt.sobolev = c.training.sobolev();
    opt.dissipativity = c.resolved_training(m.scale()).dissipativity;
    opt.batch = c.gradcheck.batch;
    opt.tolerance = c.gradcheck.tolerance;
    opt.spectral_boost = c.gradcheck.spectral_boost;
    opt.corrupt_adjoint = c.gradcheck.corrupt_adjoint || corrupt;
    const auto rep = training::grad_check(m, shape, opt, seed);
    json j = {{"passed", rep.passed}, {"max_rel_error", rep.max_rel_error}, {"tolerance", rep.tolerance}};
    j["blocks"] = json::array();
    for (const auto& b : rep.blocks) {
        std::printf("  %-24s %8zu params  rel err %.3e\n", b.name.c_str(), b.checked, b.rel_error);
        j["blocks"].push_back(
            {{"name", b.name}, {"checked", b.checked}, {"max_abs_error", b.max_abs_error}, {"rel_error", b.rel_error}});
    }
    if (!out.empty()) write_text(out, j.dump(1) + "\n");
    std::printf("gradcheck %s: max relative error %.3e (tolerance %.1e)\n", rep.passed ? "passed" : "FAILED",
                rep.max_rel_error, rep.tolerance);
    return rep.passed ? 0 : static_cast<int>(ExitCode::numerical);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Markov neural operators: data generation, training, rollout and statistics"};
    app.require_subcommand(1);

    std::string config, out, data, history, model_path, init = "sample", postprocess = "off", traj, ref, which,
                                                    layout = "pairs";
    std::uint64_t seed = 0;
    std::size_t steps = 0, index = 0;
    double perturb = 1.0, burn = 0.0, bound = INFINITY;
    bool corrupt = false;
    StatsOptions sopt;
    std::size_t burn_in = 0, bins = 50;

    auto* gen = app.add_subcommand("generate", "integrate the reference solver and write a .mnod dataset");
    gen->add_option("--config", config, "experiment config (JSON)")->required();
    gen->add_option("--out", out, "output .mnod file")->required();
    gen->add_option("--seed", seed, "overrides data.seed");
    gen->add_option("--layout", layout, "pairs or trajectory")->check(CLI::IsMember({"pairs", "trajectory"}));

    auto* tr = app.add_subcommand("train", "train a model and write a .mnockpt checkpoint");
    tr->add_option("--config", config, "experiment config (JSON)")->required();
    tr->add_option("--data", data, "training .mnod file")->required();
    tr->add_option("--out", out, "output checkpoint")->required();
    tr->add_option("--history", history, "loss history JSON (default: <out>.history.json)");
    tr->add_option("--seed", seed, "overrides training.seed");

    auto* ro = app.add_subcommand("rollout", "compose the learned map and write a trajectory file");
    ro->add_option("--model", model_path, "checkpoint")->required();
    ro->add_option("--steps", steps, "number of compositions")->required();
    ro->add_option("--init", init, "'sample' or a .mnod file");
    ro->add_option("--index", index, "snapshot or pair index when --init is a file");
    ro->add_option("--burn", burn, "solver time to integrate a sampled initial condition before starting");
    ro->add_option("--perturb", perturb, "initial state scale factor");
    ro->add_option("--postprocess", postprocess, "on or off")->check(CLI::IsMember({"on", "off"}));
    ro->add_option("--bound", bound, "abort when the state norm exceeds this");
    ro->add_option("--seed", seed, "initial-condition seed");
    ro->add_option("--out", out, "output trajectory file")->required();

    auto* st = app.add_subcommand("stats", "invariant statistics of a trajectory, optionally against a reference");
    st->add_option("--traj", traj, "trajectory file")->required();
    st->add_option("--ref", ref, "reference trajectory file");
    st->add_option("--which", which, "comma-separated statistics or 'all'");
    st->add_option("--config", config, "take the analysis section from this config");
    st->add_option("--burn-in", burn_in, "snapshots to skip (default 10%)");
    st->add_option("--bins", bins, "histogram bins");
    st->add_option("--out", out, "report JSON; CSV files are written next to it")->required();

    auto* gc = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
    gc->add_option("--config", config, "experiment config (JSON)")->required();
    gc->add_option("--seed", seed, "parameter and input seed");
    gc->add_flag("--corrupt-adjoint", corrupt, "perturb the analytic gradient (failure-path check)");
    gc->add_option("--out", out, "report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::validation);
    }

    try {
        if (gen->parsed()) return cmd_generate(config, out, gen->count("--seed") ? std::optional(seed) : std::nullopt, layout);
        if (tr->parsed())
            return cmd_train(config, data, out, history, tr->count("--seed") ? std::optional(seed) : std::nullopt);
        if (ro->parsed())
            return cmd_rollout(model_path, steps, init, perturb, postprocess, out, seed, burn, index, bound);
        if (st->parsed()) {
            if (!config.empty()) {
                const auto c = io::load_config(config);
                sopt.which = c.analysis.which;
                sopt.burn_in = c.analysis.burn_in;
                sopt.bins = c.analysis.histogram_bins;
                sopt.pod_rank = c.analysis.pod_rank;
                sopt.max_lag = c.analysis.max_lag;
                sopt.spectrum_quantity = c.analysis.spectrum_quantity;
            }
            if (!which.empty()) {
                sopt.which.clear();
                std::stringstream ss(which);
                for (std::string w; std::getline(ss, w, ',');)
                    if (!w.empty()) sopt.which.push_back(w);
            }
            if (st->count("--burn-in")) sopt.burn_in = burn_in;
            if (st->count("--bins")) sopt.bins = bins;
            return cmd_stats(traj, ref, out, sopt);
        }
        if (gc->parsed()) return cmd_gradcheck(config, seed, corrupt, out);
    } catch (const Error& e) {
        const char* kind = e.code() == ExitCode::validation ? "validation error"
                           : e.code() == ExitCode::io       ? "I/O error"
                                                            : "numerical failure";
        std::fprintf(stderr, "mno: %s: %s\n", kind, e.what());
        return static_cast<int>(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "mno: validation error: %s\n", e.what());
        return static_cast<int>(ExitCode::validation);
    }
    return 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("mno");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mno::cli
