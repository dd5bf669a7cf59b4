#pragma once

// The `mno` command-line front end. Every command is also callable in-process, which is how
// the tests drive it.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mno/core/dataset.hpp"

namespace mno::cli {

/// Parses argv (argv[0] is the program name) and runs one subcommand. Returns the exit code:
/// 0 ok, 2 validation, 3 numerical failure, 4 I/O.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

struct StatsOptions {
    std::vector<std::string> which = {"all"};
    std::optional<std::size_t> burn_in;  // default 10% of snapshots
    std::size_t bins = 50;
    std::size_t pod_rank = 8;
    std::size_t max_lag = 100;
    std::string spectrum_quantity = "vorticity";
    double reynolds = 0.0;  // for the flow entry; 0 skips it
};

struct StatsEntry {
    std::string name;
    nlohmann::json value;
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;
};

struct StatsReport {
    std::vector<StatsEntry> entries;
    nlohmann::json discrepancies = nlohmann::json::object();  // only with a reference

    nlohmann::json to_json() const;
};

/// Statistics of `traj` selected by opt.which ("all" picks every entry that applies to the
/// state kind). With a reference, each entry also gets a relative discrepancy; histograms use
/// the normalized 1-Wasserstein distance on shared bins.
StatsReport statistics_report(const Trajectory& traj, const Trajectory* ref, const StatsOptions& opt);

}  // namespace mno::cli
