#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mno {

enum class StateKind {
    vector,   // finite-dimensional ODE state
    field1d,  // periodic scalar field on [0, L)
    field2d,  // periodic scalar field on [0, 2pi)^2, row-major with x fastest
};

std::string to_string(StateKind kind);
StateKind state_kind_from_string(const std::string& name);

/// Shape of one state of a dynamical system.
struct StateShape {
    StateKind kind = StateKind::vector;
    std::size_t n = 3;           // vector length, or grid points per axis
    double domain_length = 1.0;  // fields only

    std::size_t size() const { return kind == StateKind::field2d ? n * n : n; }
    bool is_field() const { return kind != StateKind::vector; }
    int dimension() const { return kind == StateKind::field2d ? 2 : 1; }

    bool operator==(const StateShape&) const = default;

    static StateShape vector(std::size_t n) { return {StateKind::vector, n, 1.0}; }
    static StateShape field1d(std::size_t n, double length) { return {StateKind::field1d, n, length}; }
    static StateShape field2d(std::size_t n, double length) { return {StateKind::field2d, n, length}; }
};

/// State-space norm: Euclidean for vectors, coefficient l2 (grid RMS by Parseval) for fields.
double state_norm(const StateShape& shape, std::span<const double> u);

/// Squared state-space norm.
double state_norm_squared(const StateShape& shape, std::span<const double> u);

/// Contiguous batch of equally sized rows.
struct Batch {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    Batch() = default;
    Batch(std::size_t count_, std::size_t dim_) : count(count_), dim(dim_), data(count_ * dim_, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

bool all_finite(std::span<const double> values);

bool is_power_of_two(std::size_t n);

}  // namespace mno
