#include <doctest.h>

#include <cmath>
#include <fstream>

#include "mno/cli/commands.hpp"
#include "mno/io/files.hpp"
#include "test_util.hpp"

using namespace mno;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string write_json(const fs::path& dir, const std::string& name, const json& j) {
    const std::string p = (dir / name).string();
    std::ofstream(p) << j.dump(1);
    return p;
}

json read_json(const std::string& p) {
    std::ifstream f(p);
    return json::parse(f);
}

const json ks_toy = {
    {"system", {{"name", "ks"}, {"h", 1.0}, {"dt", 0.01}, {"resolution", 4}, {"domain_length", 32 * M_PI}}},
    {"data", {{"n_traj", 1}, {"t_burn", 0}, {"t_end", 2.0}, {"seed", 5}}},
    {"model", {{"type", "fno"}, {"width", 2}, {"modes", 2}, {"n_layers", 1}, {"projection_width", 2}}}};

// 3x3 linear system on vectors, learned by a single affine layer
json linear_config() {
    return {{"system", {{"name", "lorenz"}}},
            {"model", {{"type", "ffn"}, {"hidden_layers", 0}, {"activation", "identity"}}},
            {"training",
             {{"learning_rate", 0.05},
              {"epochs", 200},
              {"halving_period", 8},
              {"batch_size", 16},
              {"seed", 4},
              {"validation_fraction", 0}}}};
}

PairDataset linear_dataset() {
    PairDataset d;
    d.system = "lorenz";
    d.shape = StateShape::vector(3);
    d.dt = 0.005;
    d.h = 0.05;
    d.n_traj = 1;
    d.pairs_per_traj = 64;
    const double a[3][3] = {{0.9, 0.1, 0.0}, {-0.2, 0.8, 0.05}, {0.0, 0.3, 0.7}};
    for (int i = 0; i < 64; ++i) {
        const double u[3] = {std::sin(1.3 * i) * 2.0, std::cos(0.7 * i + 0.2) * 2.0, std::sin(0.37 * i + 1.0) * 2.0};
        for (int r = 0; r < 3; ++r) {
            d.inputs.push_back(u[r]);
            d.outputs.push_back(a[r][0] * u[0] + a[r][1] * u[1] + a[r][2] * u[2]);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("cli generate: size formula, determinism, validation exit") {
    const auto dir = test_util::scratch_dir("cli_gen");
    const auto cfg = write_json(dir, "toy.json", ks_toy);
    const std::string a = (dir / "a.mnod").string(), b = (dir / "b.mnod").string(), c = (dir / "c.mnod").string();
    REQUIRE(cli::run({"generate", "--config", cfg, "--out", a}) == 0);
    REQUIRE(cli::run({"generate", "--config", cfg, "--out", b}) == 0);
    REQUIRE(cli::run({"generate", "--config", cfg, "--out", c, "--seed", "6"}) == 0);
    const auto bytes = io::read_file(a);
    const std::size_t header_len = bytes[8] | (bytes[9] << 8) | (bytes[10] << 16) | (bytes[11] << 24);
    CHECK(bytes.size() == 16 + header_len + 2 * 2 * 4 * 8);
    CHECK(io::read_file(b) == bytes);
    CHECK(io::read_file(c) != bytes);
    const PairDataset d = io::read_dataset(a);
    CHECK(d.count() == 2);
    CHECK(std::equal(d.output(0).begin(), d.output(0).end(), d.input(1).begin()));

    json bad = ks_toy;
    bad["model"]["modes"] = 3;
    CHECK(cli::run({"generate", "--config", write_json(dir, "bad.json", bad), "--out", c}) == 2);
    CHECK(cli::run({"generate", "--config", (dir / "missing.json").string(), "--out", c}) == 4);
    CHECK(cli::run({"generate", "--out", c}) == 2);
    CHECK(cli::run({"frobnicate"}) == 2);
}

TEST_CASE("cli train: linear toy reaches 1e-8, checkpoint is deterministic") {
    const auto dir = test_util::scratch_dir("cli_train");
    const auto cfg = write_json(dir, "lin.json", linear_config());
    const std::string data = (dir / "lin.mnod").string();
    io::write_dataset(data, linear_dataset());
    const std::string ck1 = (dir / "a.mnockpt").string(), ck2 = (dir / "b.mnockpt").string();
    REQUIRE(cli::run({"train", "--config", cfg, "--data", data, "--out", ck1}) == 0);
    REQUIRE(cli::run({"train", "--config", cfg, "--data", data, "--out", ck2, "--history", (dir / "h2.json").string()}) == 0);
    CHECK(io::read_file(ck1) == io::read_file(ck2));

    const json h = read_json(ck1 + ".history.json");
    REQUIRE(h.size() == 200);
    const double first = h.front()["train_loss"], last = h.back()["train_loss"];
    MESSAGE("linear toy: first " << first << " last " << last);
    CHECK(last < 1e-8);
    // plateau: the last quarter never climbs back above the first recorded loss / 1e4
    for (std::size_t e = 150; e < 200; ++e) CHECK(h[e]["train_loss"].get<double>() < first * 1e-4);

    const auto ck = io::read_checkpoint(ck1);
    CHECK(ck.info["final"]["train_loss"] == h.back()["train_loss"]);
    CHECK(ck.info["system"]["name"] == "lorenz");

    CHECK(cli::run({"train", "--config", cfg, "--data", (dir / "nope.mnod").string(), "--out", ck1}) == 4);
    // dataset from another system
    const std::string ks_data = (dir / "ks.mnod").string();
    REQUIRE(cli::run({"generate", "--config", write_json(dir, "ks.json", ks_toy), "--out", ks_data}) == 0);
    CHECK(cli::run({"train", "--config", cfg, "--data", ks_data, "--out", ck1}) == 2);
}

TEST_CASE("cli rollout: zero steps, identity model, blow-up exit") {
    const auto dir = test_util::scratch_dir("cli_roll");
    model::Model m(model::FfnArchitecture{3, 3, 0, 1, model::Activation::identity, false, 1.0});
    io::Checkpoint ck;
    ck.architecture = io::architecture_to_json(m);
    ck.params = model::ModelParams(m.layout());
    auto w = ck.params.block("layer0.weight");
    for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
    ck.info = {{"system", {{"name", "lorenz"}}},
               {"postprocess", {{"enabled", true}, {"alpha", 100.0}, {"beta", 0.1}, {"lambda", 0.5}}}};
    const std::string id = (dir / "id.mnockpt").string();
    io::write_checkpoint(id, ck);

    const std::string t0 = (dir / "t0.mnod").string();
    REQUIRE(cli::run({"rollout", "--model", id, "--steps", "0", "--perturb", "2", "--out", t0}) == 0);
    const auto z = io::read_trajectory(t0);
    REQUIRE(z.trajectory.length() == 1);

    const std::string t1 = (dir / "t1.mnod").string();
    REQUIRE(cli::run({"rollout", "--model", id, "--steps", "25", "--out", t1, "--seed", "3"}) == 0);
    const auto c = io::read_trajectory(t1);
    REQUIRE(c.trajectory.length() == 26);
    for (std::size_t i = 1; i < 26; ++i) CHECK(std::equal(c.trajectory.snapshot(i).begin(), c.trajectory.snapshot(i).end(),
                                                          c.trajectory.snapshot(0).begin()));
    // same seed, zero steps, perturb 2: the first state is twice the sampled one
    REQUIRE(cli::run({"rollout", "--model", id, "--steps", "0", "--perturb", "2", "--seed", "3", "--out", t0}) == 0);
    const auto z3 = io::read_trajectory(t0);
    for (int k = 0; k < 3; ++k) CHECK(z3.trajectory.snapshot(0)[k] == 2.0 * c.trajectory.snapshot(0)[k]);

    // from a file
    REQUIRE(cli::run({"rollout", "--model", id, "--steps", "3", "--init", t1, "--index", "2", "--out", t0}) == 0);
    CHECK(io::read_trajectory(t0).trajectory.length() == 4);

    // doubling map blows past the bound; post-processing tames it
    for (int i = 0; i < 3; ++i) w[i * 3 + i] = 2.0;
    const std::string dbl = (dir / "dbl.mnockpt").string();
    io::write_checkpoint(dbl, ck);
    CHECK(cli::run({"rollout", "--model", dbl, "--steps", "100", "--bound", "1000", "--out", t0}) == 3);
    const auto partial = io::read_trajectory(t0);
    CHECK(partial.meta["blew_up"] == true);
    CHECK(partial.trajectory.length() < 101);
    REQUIRE(cli::run({"rollout", "--model", dbl, "--steps", "100", "--bound", "1000", "--postprocess", "on", "--out",
                      t0}) == 0);
    const auto tamed = io::read_trajectory(t0);
    double mx = 0;
    for (std::size_t i = 0; i < tamed.trajectory.length(); ++i)
        mx = std::max(mx, state_norm(tamed.trajectory.shape, tamed.trajectory.snapshot(i)));
    CHECK(mx < 200.0);
    CHECK(cli::run({"rollout", "--model", (dir / "none.mnockpt").string(), "--steps", "1", "--out", t0}) == 4);
}

TEST_CASE("cli stats: spike spectrum, all entries finite, reference discrepancies") {
    const auto dir = test_util::scratch_dir("cli_stats");
    const std::size_t n = 32;
    io::TrajectoryFile t;
    t.trajectory.shape = StateShape::field1d(n, 2.0 * M_PI);
    t.trajectory.h = 1.0;
    t.system = "ks";
    for (int s = 0; s < 10; ++s)
        for (std::size_t j = 0; j < n; ++j)
            t.trajectory.snapshots.push_back(std::sin(3.0 * 2.0 * M_PI * j / n + 0.3 * s));
    const std::string tp = (dir / "t.mnod").string();
    io::write_trajectory(tp, t);

    const std::string rp = (dir / "spec.json").string();
    REQUIRE(cli::run({"stats", "--traj", tp, "--which", "spectrum", "--burn-in", "0", "--out", rp}) == 0);
    const json r = read_json(rp);
    const auto vals = r["spectrum"]["values"].get<std::vector<double>>();
    REQUIRE(vals.size() == n / 2 + 1);
    for (std::size_t k = 0; k < vals.size(); ++k) CHECK(vals[k] == doctest::Approx(k == 3 ? 0.5 : 0.0).epsilon(1e-12));
    CHECK(fs::exists(dir / "spec.spectrum.csv"));

    const std::string all = (dir / "all.json").string();
    REQUIRE(cli::run({"stats", "--traj", tp, "--which", "all", "--out", all}) == 0);
    const json a = read_json(all);
    for (const char* e : {"energy", "spectrum", "correlation", "autocorrelation", "histogram", "pod"}) {
        CAPTURE(e);
        REQUIRE(a.contains(e));
        CHECK(fs::exists(dir / (std::string("all.") + e + ".csv")));
    }
    std::function<void(const json&)> finite = [&](const json& v) {
        if (v.is_number()) CHECK(std::isfinite(v.get<double>()));
        if (v.is_structured())
            for (const auto& x : v) finite(x);
    };
    finite(a);
    CHECK(!a.contains("discrepancies"));

    io::TrajectoryFile u = t;
    for (double& x : u.trajectory.snapshots) x *= 1.1;
    const std::string up = (dir / "u.mnod").string();
    io::write_trajectory(up, u);
    const std::string cmp = (dir / "cmp.json").string();
    REQUIRE(cli::run({"stats", "--traj", up, "--ref", tp, "--out", cmp}) == 0);
    const json d = read_json(cmp)["discrepancies"];
    CHECK(d["spectrum"].get<double>() == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(d["energy"].get<double>() == doctest::Approx(0.21).epsilon(1e-9));
    CHECK(d.contains("histogram"));

    CHECK(cli::run({"stats", "--traj", tp, "--which", "flow", "--out", cmp}) == 2);
    CHECK(cli::run({"stats", "--traj", tp, "--which", "nonsense", "--out", cmp}) == 2);
    CHECK(cli::run({"stats", "--traj", (dir / "none.mnod").string(), "--out", cmp}) == 4);
}

TEST_CASE("cli gradcheck: shipped configs pass, corrupted adjoint fails") {
    for (const char* name : {"gradcheck_ffn", "gradcheck_fno1d", "gradcheck_fno2d"}) {
        CAPTURE(name);
        CHECK(cli::run({"gradcheck", "--config", test_util::config_path(name)}) == 0);
    }
    CHECK(cli::run({"gradcheck", "--config", test_util::config_path("gradcheck_fno1d"), "--corrupt-adjoint"}) == 3);
    CHECK(cli::run({"gradcheck", "--config", test_util::config_path("gradcheck_ffn"), "--corrupt-adjoint"}) == 3);
}
