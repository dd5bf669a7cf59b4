#include <algorithm>
#include <cmath>

#include "mno/analysis/statistics.hpp"
#include "mno/cli/commands.hpp"
#include "mno/core/error.hpp"
#include "mno/io/config.hpp"

namespace mno::cli {

using nlohmann::json;
using analysis::Histogram;

namespace {

double relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

bool applies(const std::string& name, const StateShape& s, double reynolds) {
    if (name == "spectrum" || name == "correlation" || name == "pod") return s.is_field();
    if (name == "flow") return s.kind == StateKind::field2d && reynolds > 0.0;
    return true;
}

std::vector<std::string> selected(const StatsOptions& opt, const StateShape& s) {
    std::vector<std::string> out;
    const bool all = std::find(opt.which.begin(), opt.which.end(), "all") != opt.which.end();
    for (const auto& n : io::statistic_names()) {
        const bool asked = std::find(opt.which.begin(), opt.which.end(), n) != opt.which.end();
        if (!all && !asked) continue;
        if (!applies(n, s, opt.reynolds)) {
            if (asked)
                throw ValidationError("statistic \"" + n + "\" does not apply to " + to_string(s.kind) +
                                      (n == "flow" ? " trajectories without a Reynolds number" : " trajectories"));
            continue;
        }
        out.push_back(n);
    }
    for (const auto& w : opt.which)
        if (w != "all" && std::find(io::statistic_names().begin(), io::statistic_names().end(), w) ==
                              io::statistic_names().end())
            throw ValidationError("unknown statistic \"" + w + "\"");
    return out;
}

// shared histogram range over both trajectories (values after burn-in)
void value_range(const std::vector<double>& v, double& lo, double& hi) {
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
}

std::vector<double> after_burn(const std::vector<double>& v, std::size_t burn) {
    return {v.begin() + static_cast<std::ptrdiff_t>(std::min(burn, v.size())), v.end()};
}

std::vector<double> field_values(const Trajectory& t, std::size_t burn) {
    return after_burn(t.snapshots, burn * t.shape.size());
}

void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

}  // namespace

json StatsReport::to_json() const {
    json j = json::object();
    for (const auto& e : entries) j[e.name] = e.value;
    if (!discrepancies.empty()) j["discrepancies"] = discrepancies;
    return j;
}

StatsReport statistics_report(const Trajectory& traj, const Trajectory* ref, const StatsOptions& opt) {
    require(traj.length() >= 1, "trajectory is empty");
    if (ref) require(ref->shape == traj.shape, "reference trajectory has a different state shape");
    const StateShape& s = traj.shape;
    const std::size_t burn = opt.burn_in.value_or(analysis::default_burn_in(traj));
    const std::size_t rburn = ref ? opt.burn_in.value_or(analysis::default_burn_in(*ref)) : 0;
    require(burn < traj.length(), "burn-in leaves no snapshots");
    if (ref) require(rburn < ref->length(), "burn-in leaves no reference snapshots");
    const auto quantity =
        opt.spectrum_quantity == "velocity" ? analysis::SpectrumQuantity::velocity : analysis::SpectrumQuantity::vorticity;

    StatsReport rep;
    for (const auto& name : selected(opt, s)) {
        StatsEntry e;
        e.name = name;
        if (name == "energy") {
            auto mean_sq = [&](const Trajectory& t, std::size_t b) {
                return analysis::time_average(t, [&](std::span<const double> u) { return state_norm_squared(s, u); }, b);
            };
            const double v = mean_sq(traj, burn);
            e.value = {{"mean_norm_squared", v}};
            e.csv_header = {"mean_norm_squared"};
            e.csv_rows = {{v}};
            if (ref) {
                const double r = mean_sq(*ref, rburn);
                rep.discrepancies[name] = std::abs(v - r) / std::max(std::abs(r), 1e-300);
                e.csv_header.push_back("reference");
                e.csv_rows[0].push_back(r);
            }
        } else if (name == "spectrum") {
            const auto sp = analysis::fourier_spectrum(traj, burn, quantity);
            e.value = {{"k", sp.k}, {"values", sp.values}, {"quantity", opt.spectrum_quantity}};
            e.csv_header = {"k", "value"};
            std::vector<double> rv;
            if (ref) {
                rv = analysis::fourier_spectrum(*ref, rburn, quantity).values;
                rep.discrepancies[name] = relative_difference(sp.values, rv);
                e.csv_header.push_back("reference");
            }
            for (std::size_t i = 0; i < sp.k.size(); ++i) {
                e.csv_rows.push_back({sp.k[i], sp.values[i]});
                if (ref) e.csv_rows.back().push_back(rv[i]);
            }
        } else if (name == "correlation") {
            const auto c = analysis::spatial_correlation(traj, burn);
            e.value = c;
            e.csv_header = {"index", "value"};
            std::vector<double> rc;
            if (ref) {
                rc = analysis::spatial_correlation(*ref, rburn);
                rep.discrepancies[name] = relative_difference(c, rc);
                e.csv_header.push_back("reference");
            }
            for (std::size_t i = 0; i < c.size(); ++i) {
                e.csv_rows.push_back({static_cast<double>(i), c[i]});
                if (ref) e.csv_rows.back().push_back(rc[i]);
            }
        } else if (name == "autocorrelation") {
            // vectors: every component; fields: the grid value at the origin
            const std::size_t comps = s.is_field() ? 1 : s.n;
            auto acf = [&](const Trajectory& t, std::size_t b, std::size_t c) {
                auto series = after_burn(analysis::component_series(t, c), b);
                return analysis::autocorrelation(series, std::min(opt.max_lag, series.size() - 1)).values;
            };
            e.value = json::array();
            e.csv_header = {"lag"};
            std::vector<std::vector<double>> cols, rcols;
            double worst = 0.0;
            for (std::size_t c = 0; c < comps; ++c) {
                cols.push_back(acf(traj, burn, c));
                e.value.push_back(cols.back());
                e.csv_header.push_back("c" + std::to_string(c));
                if (ref) {
                    rcols.push_back(acf(*ref, rburn, c));
                    worst = std::max(worst, relative_difference(cols.back(), rcols.back()));
                    e.csv_header.push_back("ref_c" + std::to_string(c));
                }
            }
            if (ref) rep.discrepancies[name] = worst;
            std::size_t len = cols[0].size();
            for (const auto& r : rcols) len = std::min(len, r.size());
            for (std::size_t l = 0; l < len; ++l) {
                std::vector<double> row{static_cast<double>(l)};
                for (std::size_t c = 0; c < comps; ++c) {
                    row.push_back(cols[c][l]);
                    if (ref) row.push_back(rcols[c][l]);
                }
                e.csv_rows.push_back(row);
            }
        } else if (name == "histogram") {
            std::vector<std::vector<double>> vals, rvals;
            if (s.is_field()) {
                vals.push_back(field_values(traj, burn));
                if (ref) rvals.push_back(field_values(*ref, rburn));
            } else {
                for (std::size_t c = 0; c < s.n; ++c) {
                    vals.push_back(after_burn(analysis::component_series(traj, c), burn));
                    if (ref) rvals.push_back(after_burn(analysis::component_series(*ref, c), rburn));
                }
            }
            e.value = json::array();
            e.csv_header = {"component", "lo", "hi", "count"};
            if (ref) e.csv_header.push_back("reference");
            double worst = 0.0;
            for (std::size_t c = 0; c < vals.size(); ++c) {
                double lo = INFINITY, hi = -INFINITY;
                value_range(vals[c], lo, hi);
                if (ref) value_range(rvals[c], lo, hi);
                widen(lo, hi);
                const Histogram h = analysis::histogram(vals[c], opt.bins, lo, hi);
                Histogram rh;
                json jh = {{"edges", h.edges}, {"counts", h.counts}};
                if (ref) {
                    rh = analysis::histogram(rvals[c], opt.bins, lo, hi);
                    const double w = analysis::normalized_wasserstein(h, rh);
                    jh["reference_counts"] = rh.counts;
                    jh["wasserstein"] = w;
                    worst = std::max(worst, w);
                }
                e.value.push_back(jh);
                for (std::size_t b = 0; b < opt.bins; ++b) {
                    e.csv_rows.push_back({static_cast<double>(c), h.edges[b], h.edges[b + 1], h.counts[b]});
                    if (ref) e.csv_rows.back().push_back(rh.counts[b]);
                }
            }
            if (ref) rep.discrepancies[name] = worst;
        } else if (name == "pod") {
            const std::size_t avail = traj.length() - burn;
            const std::size_t rank = std::min({opt.pod_rank, avail > 1 ? avail - 1 : std::size_t{1}, s.size()});
            auto sv = [&](const Trajectory& t, std::size_t b) {
                try {
                    return analysis::pod(t, rank, b).singular_values;
                } catch (const NumericalError&) {
                    return std::vector<double>{};  // degenerate data, e.g. a constant trajectory
                }
            };
            const auto v = sv(traj, burn);
            e.value = {{"rank", rank}, {"singular_values", v}};
            e.csv_header = {"index", "singular_value"};
            std::vector<double> rv;
            if (ref) {
                rv = sv(*ref, rburn);
                rep.discrepancies[name] = relative_difference(v, rv);
                e.csv_header.push_back("reference");
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                e.csv_rows.push_back({static_cast<double>(i), v[i]});
                if (ref) e.csv_rows.back().push_back(i < rv.size() ? rv[i] : NAN);
            }
        } else if (name == "flow") {
            const auto f = analysis::flow_diagnostics(traj, opt.reynolds, burn);
            auto mean = [](const std::vector<double>& v) {
                double a = 0.0;
                for (double x : v) a += x;
                return v.empty() ? 0.0 : a / static_cast<double>(v.size());
            };
            e.value = {{"tke", f.tke}, {"dissipation", f.dissipation}, {"mean_tke", mean(f.tke)},
                       {"mean_dissipation", mean(f.dissipation)}};
            e.csv_header = {"step", "tke", "dissipation"};
            for (std::size_t i = 0; i < f.tke.size(); ++i)
                e.csv_rows.push_back({static_cast<double>(burn + i), f.tke[i], f.dissipation[i]});
            if (ref) {
                const auto rf = analysis::flow_diagnostics(*ref, opt.reynolds, rburn);
                rep.discrepancies[name] = {
                    {"tke", std::abs(mean(f.tke) - mean(rf.tke)) / std::max(mean(rf.tke), 1e-300)},
                    {"dissipation",
                     std::abs(mean(f.dissipation) - mean(rf.dissipation)) / std::max(mean(rf.dissipation), 1e-300)}};
            }
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace mno::cli
