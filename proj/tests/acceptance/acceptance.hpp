#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>

#include "mno/io/config.hpp"
#include "mno/io/files.hpp"

namespace acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    std::filesystem::path work;    // cache for trained models shared between criteria
    std::filesystem::path source;  // repository root (configs/)

    std::string config(const std::string& name) const { return (source / "configs" / (name + ".json")).string(); }
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Trained model plus how long producing it took (the cached value when reused).
struct TrainedModel {
    mno::io::ExperimentConfig cfg;
    mno::io::Checkpoint checkpoint;
    double train_seconds = 0.0;
    bool cached = false;
};

/// Loads `<work>/<tag>.mnockpt` when its key matches, else runs `produce` and stores the result.
/// The key is the config JSON plus any extra text that changes the outcome.
TrainedModel cached_model(const Context& ctx, const std::string& tag, const nlohmann::json& key,
                          const std::function<TrainedModel()>& produce);

/// Trains the configured model on `data` with resolved "auto" fields; the checkpoint info holds
/// max_train_norm, the resolved post-processing and the final epoch record.
TrainedModel train_config(const mno::io::ExperimentConfig& cfg, const mno::PairDataset& data, bool verbose = true);

/// `%.3g`-style number for detail lines.
std::string num(double v);

Outcome criterion_1(const Context& ctx);
Outcome criterion_2(const Context& ctx);
Outcome criterion_3(const Context& ctx);
Outcome criterion_4(const Context& ctx);
Outcome criterion_5(const Context& ctx);
Outcome criterion_6(const Context& ctx);
Outcome criterion_7(const Context& ctx);
Outcome criterion_8(const Context& ctx);
Outcome criterion_9(const Context& ctx);
Outcome criterion_10(const Context& ctx);

}  // namespace acceptance
