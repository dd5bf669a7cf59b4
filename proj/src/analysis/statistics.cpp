#include "mno/analysis/statistics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mno/core/error.hpp"
#include "mno/spectral/fft.hpp"
#include "mno/spectral/field.hpp"
#include "mno/spectral/flow.hpp"

namespace mno::analysis {

using spectral::cplx;

namespace {

void check_window(const Trajectory& traj, std::size_t burn_in, std::size_t min_len = 1) {
    require(traj.length() >= burn_in + min_len, "statistics window after burn-in has fewer than " +
                                                    std::to_string(min_len) + " snapshot(s)");
}

std::vector<cplx> coefficients(const Trajectory& traj, std::size_t i) {
    std::vector<cplx> c(spectral::spectral_size(traj.shape));
    spectral::forward(traj.shape, traj.snapshot(i), c);
    return c;
}

}  // namespace

double time_average(const Trajectory& traj, const Functional& g, std::size_t burn_in) {
    check_window(traj, burn_in);
    double s = 0.0;
    for (std::size_t i = burn_in; i < traj.length(); ++i) s += g(traj.snapshot(i));
    return s / static_cast<double>(traj.length() - burn_in);
}

std::size_t default_burn_in(const Trajectory& traj) { return traj.length() / 10; }

Spectrum fourier_spectrum(const Trajectory& traj, std::size_t burn_in, SpectrumQuantity quantity) {
    const StateShape& s = traj.shape;
    require(s.is_field(), "Fourier spectrum needs field-valued snapshots");
    check_window(traj, burn_in);
    const std::size_t nc = spectral::spectral_size(s);
    const double count = static_cast<double>(traj.length() - burn_in);
    Spectrum out;
    if (s.kind == StateKind::field1d) {
        out.values.assign(nc, 0.0);
        for (std::size_t t = burn_in; t < traj.length(); ++t) {
            const auto c = coefficients(traj, t);
            for (std::size_t k = 0; k < nc; ++k) out.values[k] += std::abs(c[k]) / count;
        }
        for (std::size_t k = 0; k < nc; ++k) out.k.push_back(static_cast<double>(k));
        return out;
    }
    const std::size_t shells = static_cast<std::size_t>(std::floor(std::sqrt(2.0) * (s.n / 2))) + 1;
    out.values.assign(shells, 0.0);
    std::vector<std::size_t> bin(nc);
    for (std::size_t k = 0; k < nc; ++k) {
        const spectral::Mode m = spectral::mode_at(s, k);
        bin[k] = static_cast<std::size_t>(std::floor(std::sqrt(double(m.nx * m.nx + m.ny * m.ny))));
    }
    std::vector<cplx> uh(nc), vh(nc);
    for (std::size_t t = burn_in; t < traj.length(); ++t) {
        const auto c = coefficients(traj, t);
        if (quantity == SpectrumQuantity::velocity) spectral::velocity_hat(s, c, uh, vh);
        for (std::size_t k = 0; k < nc; ++k) {
            const double e = quantity == SpectrumQuantity::vorticity ? std::norm(c[k])
                                                                      : 0.5 * (std::norm(uh[k]) + std::norm(vh[k]));
            out.values[bin[k]] += spectral::multiplicity(s, k) * e / count;
        }
    }
    for (std::size_t k = 0; k < shells; ++k) out.k.push_back(static_cast<double>(k));
    return out;
}

std::vector<double> spatial_correlation(const Trajectory& traj, std::size_t burn_in) {
    const StateShape& s = traj.shape;
    require(s.is_field(), "spatial correlation needs field-valued snapshots");
    check_window(traj, burn_in);
    const std::size_t nc = spectral::spectral_size(s);
    const double count = static_cast<double>(traj.length() - burn_in);
    std::vector<cplx> power(nc, 0.0);
    for (std::size_t t = burn_in; t < traj.length(); ++t) {
        const auto c = coefficients(traj, t);
        for (std::size_t k = 0; k < nc; ++k) power[k] += std::norm(c[k]) / count;
    }
    std::vector<double> out(s.size());
    spectral::inverse(s, power, out);
    return out;
}

Autocorrelation autocorrelation(std::span<const double> a, std::optional<std::size_t> max_lag) {
    require(a.size() >= 2, "autocorrelation needs at least 2 samples");
    const std::size_t n = a.size();
    const std::size_t lags = std::min(max_lag.value_or(n - 1), n - 1);
    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    Autocorrelation r;
    if (var / static_cast<double>(n) <= 1e-12 * mean * mean) {
        r.values.assign(lags + 1, 1.0);
        r.degenerate = true;
        return r;
    }
    r.values.resize(lags + 1);
    for (std::size_t tau = 0; tau <= lags; ++tau) {
        double s = 0.0;
        for (std::size_t t = 0; t + tau < n; ++t) s += (a[t] - mean) * (a[t + tau] - mean);
        r.values[tau] = s / var;
    }
    return r;
}

std::vector<double> mode_magnitude_series(const Trajectory& traj, std::size_t n) {
    require(traj.shape.kind == StateKind::field1d, "mode series needs a 1D field trajectory");
    require(n <= traj.shape.n / 2, "mode number above the Nyquist mode");
    std::vector<double> out;
    for (std::size_t t = 0; t < traj.length(); ++t) out.push_back(std::abs(coefficients(traj, t)[n]));
    return out;
}

std::vector<double> component_series(const Trajectory& traj, std::size_t component) {
    require(component < traj.shape.size(), "component index out of range");
    std::vector<double> out;
    for (std::size_t t = 0; t < traj.length(); ++t) out.push_back(traj.snapshot(t)[component]);
    return out;
}

Pod pod(const Trajectory& traj, std::size_t rank, std::size_t burn_in) {
    check_window(traj, burn_in);
    const std::size_t m = traj.length() - burn_in, d = traj.shape.size();
    require(rank >= 1 && rank <= std::min(m, d), "POD rank must lie in 1..min(snapshots, state dimension)");
    Eigen::MatrixXd x(m, d);
    for (std::size_t i = 0; i < m; ++i) {
        const auto u = traj.snapshot(burn_in + i);
        for (std::size_t k = 0; k < d; ++k) x(i, k) = u[k];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::MatrixXd basis(d, rank);
    Eigen::VectorXd lam(rank);
    if (m <= d) {
        // method of snapshots
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x * x.transpose());
        for (std::size_t r = 0; r < rank; ++r) {
            lam(r) = es.eigenvalues()(m - 1 - r);
            basis.col(r) = x.transpose() * es.eigenvectors().col(m - 1 - r);
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
        for (std::size_t r = 0; r < rank; ++r) {
            lam(r) = es.eigenvalues()(d - 1 - r);
            basis.col(r) = es.eigenvectors().col(d - 1 - r);
        }
    }
    const double top = std::max(lam(0), 0.0);
    std::size_t achieved = 0;
    while (achieved < rank && lam(achieved) > 1e-20 * top && lam(achieved) > 0.0) ++achieved;
    if (achieved < rank)
        throw NumericalError("POD rank " + std::to_string(rank) + " exceeds the data rank " + std::to_string(achieved));

    // modified Gram-Schmidt keeps the rows orthonormal to rounding; the largest entry is made positive
    for (std::size_t r = 0; r < rank; ++r) {
        for (std::size_t q = 0; q < r; ++q) basis.col(r) -= basis.col(q).dot(basis.col(r)) * basis.col(q);
        basis.col(r).normalize();
        Eigen::Index imax = 0;
        basis.col(r).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, r) < 0.0) basis.col(r) *= -1.0;
    }
    const Eigen::MatrixXd coords = x * basis;

    Pod p;
    p.dim = d;
    p.rank = rank;
    p.mean.assign(mean.data(), mean.data() + d);
    p.basis.resize(rank * d);
    for (std::size_t r = 0; r < rank; ++r)
        for (std::size_t k = 0; k < d; ++k) p.basis[r * d + k] = basis(k, r);
    for (std::size_t r = 0; r < rank; ++r) p.singular_values.push_back(std::sqrt(std::max(lam(r), 0.0)));
    p.coordinates.resize(m * rank);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < rank; ++r) p.coordinates[i * rank + r] = coords(i, r);
    return p;
}

std::vector<double> pod_project(const Trajectory& traj, const Pod& ref, std::size_t burn_in) {
    check_window(traj, burn_in);
    require(traj.shape.size() == ref.dim, "POD reference basis has a different state dimension");
    const std::size_t d = ref.dim;
    std::vector<double> out;
    out.reserve((traj.length() - burn_in) * ref.rank);
    for (std::size_t i = burn_in; i < traj.length(); ++i) {
        const auto u = traj.snapshot(i);
        for (std::size_t r = 0; r < ref.rank; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += (u[k] - ref.mean[k]) * ref.basis[r * d + k];
            out.push_back(s);
        }
    }
    return out;
}

double pod_reconstruction_error(const Trajectory& traj, const Pod& p, std::size_t r, std::size_t burn_in) {
    require(r <= p.rank, "reconstruction rank above the POD rank");
    const auto c = pod_project(traj, p, burn_in);
    const std::size_t d = p.dim;
    double err = 0.0;
    for (std::size_t i = burn_in; i < traj.length(); ++i) {
        const auto u = traj.snapshot(i);
        const double* ci = c.data() + (i - burn_in) * p.rank;
        for (std::size_t k = 0; k < d; ++k) {
            double v = p.mean[k];
            for (std::size_t q = 0; q < r; ++q) v += ci[q] * p.basis[q * d + k];
            err += (u[k] - v) * (u[k] - v);
        }
    }
    return std::sqrt(err);
}

FlowDiagnostics flow_diagnostics(const Trajectory& w, double reynolds, std::size_t burn_in) {
    const StateShape& s = w.shape;
    require(s.kind == StateKind::field2d, "flow diagnostics need 2D vorticity snapshots");
    require(reynolds > 0.0, "Reynolds number must be positive");
    check_window(w, burn_in, 2);
    const std::size_t nt = w.length() - burn_in, p = s.size(), nc = spectral::spectral_size(s);
    std::vector<double> u(nt * p), v(nt * p), ubar(p, 0.0), vbar(p, 0.0);
    std::vector<cplx> uh(nc), vh(nc);
    FlowDiagnostics out;
    for (std::size_t t = 0; t < nt; ++t) {
        const auto c = coefficients(w, burn_in + t);
        spectral::velocity_hat(s, c, uh, vh);
        spectral::inverse(s, uh, std::span(u).subspan(t * p, p));
        spectral::inverse(s, vh, std::span(v).subspan(t * p, p));
        for (std::size_t i = 0; i < p; ++i) {
            ubar[i] += u[t * p + i] / static_cast<double>(nt);
            vbar[i] += v[t * p + i] / static_cast<double>(nt);
        }
        double w2 = 0.0;
        for (double x : w.snapshot(burn_in + t)) w2 += x * x;
        out.dissipation.push_back(w2 / static_cast<double>(p) / reynolds);
    }
    for (std::size_t t = 0; t < nt; ++t) {
        double e = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double du = u[t * p + i] - ubar[i], dv = v[t * p + i] - vbar[i];
            e += du * du + dv * dv;
        }
        out.tke.push_back(e / static_cast<double>(p));
    }
    return out;
}

double Histogram::total() const {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
    require(bins >= 2, "histogram needs at least 2 bins");
    require(hi > lo, "histogram range must satisfy lo < hi");
    Histogram h;
    h.counts.assign(bins, 0.0);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * double(i) / double(bins));
    const double width = (hi - lo) / double(bins);
    for (double x : values) {
        std::size_t b;
        if (x < lo) {
            b = 0;
            ++h.below;
        } else if (x > hi) {
            b = bins - 1;
            ++h.above;
        } else {
            b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
        }
        h.counts[b] += 1.0;
    }
    return h;
}

Histogram pointwise_histogram(const Trajectory& traj, std::size_t bins, double lo, double hi, std::size_t burn_in) {
    check_window(traj, burn_in);
    const std::size_t d = traj.shape.size();
    return histogram(std::span(traj.snapshots).subspan(burn_in * d), bins, lo, hi);
}

double normalized_wasserstein(const Histogram& a, const Histogram& b) {
    require(a.edges == b.edges, "Wasserstein distance needs histograms on the same edges");
    const double ta = a.total(), tb = b.total();
    require(ta > 0.0 && tb > 0.0, "Wasserstein distance needs non-empty histograms");
    double fa = 0.0, fb = 0.0, w = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        fa += a.counts[i] / ta;
        fb += b.counts[i] / tb;
        w += std::abs(fa - fb) * (a.edges[i + 1] - a.edges[i]);
    }
    return w / (a.edges.back() - a.edges.front());
}

}  // namespace mno::analysis
