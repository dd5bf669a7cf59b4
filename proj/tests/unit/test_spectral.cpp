#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mno/core/error.hpp"
#include "mno/core/rng.hpp"
#include "mno/spectral/field.hpp"
#include "mno/spectral/flow.hpp"
#include "mno/spectral/sobolev.hpp"

using namespace mno;
using namespace mno::spectral;
using std::numbers::pi;

namespace {

GridField sample_1d(std::size_t n, double length, auto f) {
    GridField g(StateShape::field1d(n, length));
    for (std::size_t i = 0; i < n; ++i) g.values[i] = f(length * static_cast<double>(i) / static_cast<double>(n));
    return g;
}

GridField sample_2d(std::size_t n, auto f) {
    GridField g(StateShape::field2d(n, 2 * pi));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            g.values[j * n + i] = f(2 * pi * static_cast<double>(i) / static_cast<double>(n),
                                    2 * pi * static_cast<double>(j) / static_cast<double>(n));
    return g;
}

GridField random_field(const StateShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    GridField g(shape);
    fill_standard_normal(rng, g.values);
    return g;
}

// random smooth, mean-zero field with no Nyquist content
GridField smooth_field(const StateShape& shape, std::uint64_t seed, long kmax) {
    Rng rng(seed);
    SpectralField f(shape);
    for (std::size_t s = 0; s < f.coeffs.size(); ++s) {
        const Mode m = mode_at(shape, s);
        if ((m.nx == 0 && m.ny == 0) || std::abs(m.nx) > kmax || std::abs(m.ny) > kmax) continue;
        f.coeffs[s] = cplx(standard_normal(rng), standard_normal(rng));
    }
    return transform_inverse(f);
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("forward transform matches a direct DFT sum") {
    for (auto shape : {StateShape::field1d(16, 3.0), StateShape::field2d(8, 2 * pi)}) {
        const GridField g = random_field(shape, 4);
        const SpectralField f = transform_forward(g);
        const std::size_t n = shape.n;
        for (std::size_t s = 0; s < f.coeffs.size(); ++s) {
            const Mode m = mode_at(shape, s);
            cplx acc = 0;
            for (std::size_t p = 0; p < g.values.size(); ++p) {
                const double x = static_cast<double>(p % n), y = static_cast<double>(p / n);
                const double ph = -2 * pi * (static_cast<double>(m.nx) * x + static_cast<double>(m.ny) * y) / n;
                acc += g.values[p] * std::polar(1.0, shape.dimension() == 2 ? ph : -2 * pi * m.nx * double(p) / n);
            }
            acc /= static_cast<double>(g.values.size());
            CHECK(std::abs(acc - f.coeffs[s]) < 1e-13);
        }
    }
}

TEST_CASE("constant field has only the DC coefficient") {
    const GridField g = sample_1d(32, 5.0, [](double) { return 2.5; });
    const SpectralField f = transform_forward(g);
    CHECK(f.coeffs[0].real() == doctest::Approx(2.5).epsilon(1e-15));
    for (std::size_t s = 1; s < f.coeffs.size(); ++s) CHECK(std::abs(f.coeffs[s]) < 1e-15);
}

TEST_CASE("sin(x) coefficients under the 1/N convention") {
    const GridField g = sample_1d(64, 2 * pi, [](double x) { return std::sin(x); });
    const SpectralField f = transform_forward(g);
    CHECK(std::abs(f.coeffs[1] - cplx(0, -0.5)) < 1e-15);
    for (std::size_t s = 0; s < f.coeffs.size(); ++s)
        if (s != 1) CHECK(std::abs(f.coeffs[s]) < 1e-15);
}

TEST_CASE("round trip and Parseval") {
    for (auto shape : {StateShape::field1d(128, 32 * pi), StateShape::field2d(32, 2 * pi)}) {
        const GridField g = random_field(shape, 7);
        const GridField back = transform_inverse(transform_forward(g));
        CHECK(max_abs(g.values, back.values) < 1e-13);
        const SpectralField f = transform_forward(g);
        const double coeff = weighted_norm(shape, f.coeffs, std::vector<double>(f.coeffs.size(), 1.0));
        CHECK(std::abs(coeff - state_norm(shape, g.values)) < 1e-12);
    }
}

TEST_CASE("multi-channel transforms equal per-channel transforms") {
    const StateShape shape = StateShape::field2d(16, 2 * pi);
    const std::size_t c = 3, np = shape.size(), nm = spectral_size(shape);
    const GridField g = random_field(StateShape::field1d(np * c, 1.0), 2);
    std::vector<cplx> all(nm * c);
    forward(shape, g.values, all, c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        std::vector<double> one(np);
        for (std::size_t p = 0; p < np; ++p) one[p] = g.values[p * c + ch];
        std::vector<cplx> f(nm);
        forward(shape, one, f);
        for (std::size_t m = 0; m < nm; ++m) CHECK(f[m] == all[m * c + ch]);
    }
}

TEST_CASE("inverse takes the real part for non-Hermitian self-conjugate columns") {
    const StateShape shape = StateShape::field2d(8, 2 * pi);
    SpectralField f(shape);
    const std::size_t half = 5;
    f.coeffs[1 * half + 0] = cplx(1.0, 2.0);  // (kx, ky) = (0, 1), no partner set
    const GridField g = transform_inverse(f);
    for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t i = 0; i < 8; ++i) {
            const double y = 2 * pi * double(j) / 8;
            CHECK(g.values[j * 8 + i] == doctest::Approx(std::cos(y) - 2 * std::sin(y)).epsilon(1e-13));
        }
}

TEST_CASE("spectral derivatives") {
    const GridField c = sample_1d(64, 2 * pi, [](double) { return 3.0; });
    CHECK(max_abs(derivative(c, 1).values) < 1e-14);

    const GridField s = sample_1d(64, 2 * pi, [](double x) { return std::sin(x); });
    const GridField cs = sample_1d(64, 2 * pi, [](double x) { return std::cos(x); });
    CHECK(max_abs(derivative(s, 1).values, cs.values) < 1e-12);

    const GridField s2 = sample_1d(64, 2 * pi, [](double x) { return std::sin(2 * x); });
    const GridField m4 = sample_1d(64, 2 * pi, [](double x) { return -4 * std::sin(2 * x); });
    CHECK(max_abs(derivative(s2, 2).values, m4.values) < 1e-12);

    // physical wavenumbers on a longer domain
    const double len = 32 * pi;
    const GridField a = sample_1d(256, len, [&](double x) { return std::sin(2 * pi * 5 * x / len); });
    const GridField da = sample_1d(256, len, [&](double x) { return (2 * pi * 5 / len) * std::cos(2 * pi * 5 * x / len); });
    CHECK(max_abs(derivative(a, 1).values, da.values) < 1e-12);

    const GridField y = sample_2d(32, [](double x, double yy) { return std::sin(x) * std::cos(3 * yy); });
    const GridField dy = sample_2d(32, [](double x, double yy) { return -3 * std::sin(x) * std::sin(3 * yy); });
    CHECK(max_abs(derivative(y, 1, 1).values, dy.values) < 1e-12);
}

TEST_CASE("repeated first derivatives equal the higher-order derivative") {
    for (auto shape : {StateShape::field1d(64, 2 * pi), StateShape::field2d(32, 2 * pi)}) {
        const GridField g = smooth_field(shape, 3, 6);
        for (int axis = 0; axis < shape.dimension(); ++axis) {
            GridField rep = g;
            for (int i = 1; i <= 4; ++i) {
                rep = derivative(rep, 1, axis);
                const GridField direct = derivative(g, i, axis);
                CHECK(max_abs(rep.values, direct.values) < 1e-10 * std::max(1.0, max_abs(direct.values)));
            }
        }
    }
}

TEST_CASE("odd derivatives zero the Nyquist mode") {
    const GridField g = sample_1d(16, 2 * pi, [](double x) { return std::cos(8 * x); });
    CHECK(max_abs(derivative(g, 1).values) < 1e-14);
    CHECK(max_abs(derivative(g, 2).values) > 1.0);
}

TEST_CASE("sobolev norms of sin(x)") {
    const GridField s = sample_1d(64, 2 * pi, [](double x) { return std::sin(x); });
    CHECK(std::abs(sobolev_norm(s, 0) - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(sobolev_norm(s, 1) - 1.0) < 1e-12);
    CHECK(sobolev_norm(GridField(s.shape), 3) == 0.0);
}

TEST_CASE("sobolev norm is non-decreasing in k") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GridField g = random_field(StateShape::field1d(32, 0.5 + static_cast<double>(seed)), seed);
        double prev = 0;
        for (int k = 0; k <= 4; ++k) {
            const double v = sobolev_norm(g, k);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("relative sobolev loss examples") {
    const GridField t = sample_1d(64, 2 * pi, [](double x) { return std::sin(x); });
    CHECK(relative_sobolev_loss(t, t, {3, true}) == 0.0);
    GridField two = t;
    for (double& v : two.values) v *= 2;
    CHECK(std::abs(relative_sobolev_loss(two, t, {0, true}) - 1.0) < 1e-12);
    const GridField p = sample_1d(64, 2 * pi, [](double x) { return std::sin(x) + 0.1 * std::sin(8 * x); });
    CHECK(std::abs(relative_sobolev_loss(p, t, {1, true}) - 0.9) < 1e-12);
    // unbalanced: ||0.1 sin 8x||_1 / ||sin x||_1 = 0.1 sqrt(65/2) / 1
    CHECK(std::abs(relative_sobolev_loss(p, t, {1, false}) - 0.1 * std::sqrt(65.0 / 2.0)) < 1e-12);
}

TEST_CASE("relative loss is zero only for equal fields") {
    const GridField t = random_field(StateShape::field1d(32, 2 * pi), 1);
    GridField p = t;
    CHECK(relative_sobolev_loss(p, t, {2, true}) == 0.0);
    p.values[5] += 1e-6;
    CHECK(relative_sobolev_loss(p, t, {2, true}) > 0.0);
}

TEST_CASE("relative loss rejects a zero truth term") {
    const GridField c = sample_1d(16, 2 * pi, [](double) { return 1.0; });
    const GridField p = sample_1d(16, 2 * pi, [](double x) { return std::sin(x); });
    CHECK_THROWS_AS(relative_sobolev_loss(p, c, {1, true}), NumericalError);
    CHECK_NOTHROW(relative_sobolev_loss(p, c, {0, true}));
    const StateShape v = StateShape::vector(3);
    const std::vector<double> a{1, 2, 3}, z{0, 0, 0};
    CHECK_THROWS_AS(relative_sobolev_loss(v, a, z, {0, true}), NumericalError);
    CHECK_THROWS_AS(relative_sobolev_loss(v, a, a, {1, true}), ValidationError);
}

TEST_CASE("relative loss gradient matches central differences") {
    for (auto shape : {StateShape::field1d(16, 3.0), StateShape::field2d(8, 2 * pi), StateShape::vector(3)}) {
        for (SobolevSpec spec : {SobolevSpec{0, true}, SobolevSpec{1, true}, SobolevSpec{2, true},
                                 SobolevSpec{2, false}}) {
            if (!shape.is_field() && spec.order > 0) continue;
            GridField p = random_field(shape, 10), t = random_field(shape, 11);
            std::vector<double> g(shape.size());
            relative_sobolev_loss_grad(shape, p.values, t.values, spec, g);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double h = 1e-6;
                const double keep = p.values[i];
                p.values[i] = keep + h;
                const double up = relative_sobolev_loss(shape, p.values, t.values, spec);
                p.values[i] = keep - h;
                const double dn = relative_sobolev_loss(shape, p.values, t.values, spec);
                p.values[i] = keep;
                const double fd = (up - dn) / (2 * h);
                CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("vorticity to velocity single modes") {
    const GridField wy = sample_2d(32, [](double, double y) { return std::cos(y); });
    const GridField psi = streamfunction(wy);
    CHECK(max_abs(psi.values, wy.values) < 1e-13);
    const Velocity vy = vorticity_to_velocity(wy);
    CHECK(max_abs(vy.u.values, sample_2d(32, [](double, double y) { return -std::sin(y); }).values) < 1e-13);
    CHECK(max_abs(vy.v.values) < 1e-13);

    const GridField wx = sample_2d(32, [](double x, double) { return std::cos(x); });
    const Velocity vx = vorticity_to_velocity(wx);
    CHECK(max_abs(vx.u.values) < 1e-13);
    CHECK(max_abs(vx.v.values, sample_2d(32, [](double x, double) { return std::sin(x); }).values) < 1e-13);
}

TEST_CASE("curl recovery and zero divergence on random mean-zero vorticity") {
    const StateShape shape = StateShape::field2d(32, 2 * pi);
    const GridField w = smooth_field(shape, 21, 15);
    const Velocity vel = vorticity_to_velocity(w);
    CHECK(max_abs(curl(vel).values, w.values) < 1e-12);
    CHECK(max_abs(divergence(vel).values) < 1e-12);
    const GridField psi = streamfunction(w);
    CHECK(max_abs(velocity_to_streamfunction(vel).values, psi.values) < 1e-12);
}

TEST_CASE("poisson solve rejects a non-zero mean") {
    const GridField w = sample_2d(16, [](double x, double) { return 1.0 + std::cos(x); });
    CHECK_THROWS_AS(vorticity_to_velocity(w), ValidationError);
}

TEST_CASE("dealias mask keeps |n| < N/3") {
    const StateShape s = StateShape::field1d(256, 32 * pi);
    const auto mask = dealias_mask(s);
    CHECK(mask[85] == 1);
    CHECK(mask[86] == 0);
    const StateShape s2 = StateShape::field2d(32, 2 * pi);
    const auto m2 = dealias_mask(s2);
    std::size_t kept = 0;
    for (auto b : m2) kept += b;
    CHECK(kept == 21 * 11);  // ny in [-10, 10], nx in [0, 10]
}
