#pragma once

// Invariant statistics of trajectories: time averages, spectra, correlations, POD,
// flow diagnostics and histograms.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mno/core/dataset.hpp"

namespace mno::analysis {

using Functional = std::function<double(std::span<const double>)>;

/// Mean of G over snapshots [burn_in, length). Throws ValidationError on an empty window.
double time_average(const Trajectory& traj, const Functional& g, std::size_t burn_in = 0);

/// Default burn-in: 10% of the snapshots.
std::size_t default_burn_in(const Trajectory& traj);

struct Spectrum {
    std::vector<double> k;       // mode number (1D) or integer shell (2D)
    std::vector<double> values;
};

enum class SpectrumQuantity { vorticity, velocity };

/// 1D: time-averaged |f_hat(n)| for n = 0..N/2.
/// 2D: time-averaged shell energy E(k) = sum_{k <= |n| < k+1} |w_hat(n)|^2 (vorticity) or
/// 1/2 |u_hat(n)|^2 (velocity from the vorticity), over the full spectrum; every shell is kept.
Spectrum fourier_spectrum(const Trajectory& traj, std::size_t burn_in = 0,
                          SpectrumQuantity quantity = SpectrumQuantity::vorticity);

/// C(r) = time average of the spatial mean of u(x) u(x + r), from the averaged power spectrum.
/// Grid-shaped: N values in 1D, N^2 in 2D (x fastest).
std::vector<double> spatial_correlation(const Trajectory& traj, std::size_t burn_in = 0);

struct Autocorrelation {
    std::vector<double> values;  // R(0..max_lag)
    bool degenerate = false;     // variance below 1e-12 mean^2; values are all ones
};

/// Biased-estimator normalized ACF. max_lag defaults to length - 1.
Autocorrelation autocorrelation(std::span<const double> series, std::optional<std::size_t> max_lag = {});

/// Time series of |f_hat(n)| of a 1D field trajectory.
std::vector<double> mode_magnitude_series(const Trajectory& traj, std::size_t n);

/// Time series of one component of a vector-state trajectory.
std::vector<double> component_series(const Trajectory& traj, std::size_t component);

struct Pod {
    std::size_t dim = 0;
    std::size_t rank = 0;
    std::vector<double> mean;             // dim
    std::vector<double> basis;            // rank x dim, orthonormal rows
    std::vector<double> singular_values;  // rank, non-increasing
    std::vector<double> coordinates;      // snapshots x rank
};

/// POD of the mean-subtracted snapshots. The eigenproblem is solved on the smaller of the
/// snapshot Gram matrix and the state covariance. Throws NumericalError if rank exceeds the data rank.
Pod pod(const Trajectory& traj, std::size_t rank, std::size_t burn_in = 0);

/// Coordinates of the snapshots (minus the reference mean) on a reference basis: snapshots x rank.
std::vector<double> pod_project(const Trajectory& traj, const Pod& reference, std::size_t burn_in = 0);

/// Least-squares reconstruction error |X - mean - coords basis|_F of the snapshots with the first r modes.
double pod_reconstruction_error(const Trajectory& traj, const Pod& p, std::size_t r, std::size_t burn_in = 0);

struct FlowDiagnostics {
    std::vector<double> tke;          // spatial mean |u - u_bar|^2, no 1/2
    std::vector<double> dissipation;  // spatial mean w^2 / Re
};

/// Vorticity trajectory on [0, 2 pi)^2; u_bar is the temporal mean velocity over the window.
FlowDiagnostics flow_diagnostics(const Trajectory& vorticity, double reynolds, std::size_t burn_in = 0);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<double> counts;
    std::size_t below = 0;  // values clamped into the first bin
    std::size_t above = 0;  // values clamped into the last bin
    bool clamped() const { return below + above > 0; }
    double total() const;
};

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

/// All grid values (or vector components) of snapshots [burn_in, length).
Histogram pointwise_histogram(const Trajectory& traj, std::size_t bins, double lo, double hi,
                              std::size_t burn_in = 0);

/// 1-Wasserstein distance between two histograms on the same edges, divided by the edge span.
double normalized_wasserstein(const Histogram& a, const Histogram& b);

}  // namespace mno::analysis
