#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mno/core/state.hpp"

namespace mno {

/// (u(t), u(t + h)) pairs. Trajectory i owns pairs [i * pairs_per_traj, (i + 1) * pairs_per_traj).
struct PairDataset {
    std::string system;
    StateShape shape;
    double dt = 0.0;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_traj = 0;
    std::size_t pairs_per_traj = 0;
    std::vector<double> inputs;
    std::vector<double> outputs;

    std::size_t count() const { return shape.size() ? inputs.size() / shape.size() : 0; }
    std::span<const double> input(std::size_t i) const { return {inputs.data() + i * shape.size(), shape.size()}; }
    std::span<const double> output(std::size_t i) const { return {outputs.data() + i * shape.size(), shape.size()}; }
};

/// Uniformly spaced snapshots.
struct Trajectory {
    std::string provenance;
    StateShape shape;
    double h = 0.0;
    std::vector<double> snapshots;

    std::size_t length() const { return shape.size() ? snapshots.size() / shape.size() : 0; }
    std::span<const double> snapshot(std::size_t i) const {
        return {snapshots.data() + i * shape.size(), shape.size()};
    }
    std::span<double> snapshot(std::size_t i) { return {snapshots.data() + i * shape.size(), shape.size()}; }
    void push(std::span<const double> u) { snapshots.insert(snapshots.end(), u.begin(), u.end()); }
};

}  // namespace mno
