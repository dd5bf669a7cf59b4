#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mno/core/error.hpp"
#include "mno/core/rng.hpp"
#include "mno/model/model.hpp"
#include "mno/spectral/field.hpp"

using namespace mno;
using namespace mno::model;
using std::numbers::pi;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed, double s = 1.0) {
    Rng rng(seed);
    std::vector<double> v(n);
    fill_standard_normal(rng, v);
    for (double& x : v) x *= s;
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// loss = <c, model(x)>, checked against central differences for every parameter and input
void check_gradients(const Model& m, ModelParams p, const StateShape& shape, std::size_t batch, double tol) {
    const std::size_t d = shape.size();
    std::vector<double> x = randn(batch * d, 1), c = randn(batch * d, 2), y(batch * d);
    Tape tape;
    m.forward(p, shape, x, batch, y, &tape);
    GradientBuffer g(p.layout);
    std::vector<double> dx(x.size());
    m.backward(p, tape, c, g, dx);

    auto loss = [&](const ModelParams& q, const std::vector<double>& xin) {
        std::vector<double> out(xin.size());
        m.forward(q, shape, xin, batch, out);
        return dot(c, out);
    };
    double worst = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double keep = p.values[i];
        const double h = 1e-6 * std::max(1.0, std::abs(keep));
        p.values[i] = keep + h;
        const double up = loss(p, x);
        p.values[i] = keep - h;
        const double dn = loss(p, x);
        p.values[i] = keep;
        const double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(fd - g.values[i]) / std::max({std::abs(fd), std::abs(g.values[i]), 1e-3}));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        const double h = 1e-6 * std::max(1.0, std::abs(keep));
        x[i] = keep + h;
        const double up = loss(p, x);
        x[i] = keep - h;
        const double dn = loss(p, x);
        x[i] = keep;
        const double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(fd - dx[i]) / std::max({std::abs(fd), std::abs(dx[i]), 1e-3}));
    }
    MESSAGE("max relative gradient error " << worst);
    CHECK(worst < tol);
}

}  // namespace

TEST_CASE("ffn with zero parameters outputs zero") {
    const Model m(FfnArchitecture{3, 3, 2, 8, Activation::gelu, false, 1.0});
    ModelParams p(m.layout());
    const std::vector<double> x{1, -2, 3};
    for (double v : m.apply(p, StateShape::vector(3), x)) CHECK(v == 0.0);
}

TEST_CASE("single affine layer with identity weights is the identity") {
    const Model m(FfnArchitecture{3, 3, 0, 1, Activation::identity, false, 1.0});
    ModelParams p(m.layout());
    auto w = p.block("layer0.weight");
    for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
    const std::vector<double> x{1.25, -2.5, 3.75};
    CHECK(m.apply(p, StateShape::vector(3), x) == x);
}

TEST_CASE("one hidden layer by hand") {
    FfnArchitecture a{2, 2, 1, 2, Activation::tanh, false, 1.0};
    const Model m(a);
    ModelParams p(m.layout());
    // W0 = [[1, 2], [3, 4]] ([in][out]), b0 = [0.1, -0.2]; W1 = [[0.5, -1], [2, 0.25]], b1 = [1, 0]
    const double w0[] = {1, 2, 3, 4}, b0[] = {0.1, -0.2}, w1[] = {0.5, -1, 2, 0.25}, b1[] = {1, 0};
    std::copy(w0, w0 + 4, p.block("layer0.weight").begin());
    std::copy(b0, b0 + 2, p.block("layer0.bias").begin());
    std::copy(w1, w1 + 4, p.block("layer1.weight").begin());
    std::copy(b1, b1 + 2, p.block("layer1.bias").begin());
    const std::vector<double> x{0.3, -0.1};
    const double h0 = std::tanh(0.3 * 1 + -0.1 * 3 + 0.1), h1 = std::tanh(0.3 * 2 + -0.1 * 4 - 0.2);
    const auto y = m.apply(p, StateShape::vector(2), x);
    CHECK(std::abs(y[0] - (h0 * 0.5 + h1 * 2 + 1)) < 1e-14);
    CHECK(std::abs(y[1] - (h0 * -1 + h1 * 0.25)) < 1e-14);
}

TEST_CASE("gelu values") {
    std::vector<double> in{-1.0, 0.0, 2.0}, out(3);
    activate(Activation::gelu, in, out);
    // x * Phi(x), Phi from the normal CDF tables
    CHECK(out[0] == doctest::Approx(-1.0 * 0.15865525393145707).epsilon(1e-14));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == doctest::Approx(2.0 * 0.9772498680518208).epsilon(1e-14));
}

TEST_CASE("scalar linear model gradient") {
    const Model m(FfnArchitecture{1, 1, 0, 1, Activation::identity, false, 1.0});
    ModelParams p(m.layout());
    const double w = 1.7, x = 0.6, t = 2.0;
    p.block("layer0.weight")[0] = w;
    Tape tape;
    std::vector<double> y(1);
    m.forward(p, StateShape::vector(1), std::vector<double>{x}, 1, y, &tape);
    GradientBuffer g(p.layout);
    m.backward(p, tape, std::vector<double>{y[0] - t}, g);
    CHECK(g.block("layer0.weight")[0] == doctest::Approx((w * x - t) * x).epsilon(1e-15));
    CHECK(g.block("layer0.bias")[0] == doctest::Approx(w * x - t).epsilon(1e-15));
}

TEST_CASE("zero cotangent gives zero gradients") {
    const Model m(FnoArchitecture{1, 4, 3, 2, 8, Activation::gelu, false, 1.0});
    const ModelParams p = m.init(3);
    const StateShape s = StateShape::field1d(16, 2 * pi);
    Tape tape;
    std::vector<double> x = randn(32, 4), y(32), dx(32, 1.0);
    m.forward(p, s, x, 2, y, &tape);
    GradientBuffer g(p.layout);
    m.backward(p, tape, std::vector<double>(32, 0.0), g, dx);
    for (double v : g.values) CHECK(v == 0.0);
    for (double v : dx) CHECK(v == 0.0);
}

TEST_CASE("fno parameter count") {
    const FnoArchitecture a{1, 32, 12, 4, 128, Activation::gelu, false, 1.0};
    const ParamLayout l = fno_layout(a);
    const std::size_t expect = 4 * (2 * 32 * 32 * 12 + 32 * 32 + 32) + (2 * 32 + 32) + (32 * 128 + 128) + (128 + 1);
    CHECK(expect == 106977);
    CHECK(l.total() == expect);
    CHECK(l.blocks().front().name == "lift.weight");
    CHECK(l.block("fourier0.spectral").complex);
    CHECK(l.block("fourier3.spectral").shape == std::vector<std::size_t>{12, 32, 32});

    const FnoArchitecture b{2, 8, 4, 1, 16, Activation::gelu, false, 1.0};
    CHECK(fno_layout(b).block("fourier0.spectral").count == 2 * (2 * 4 * 4) * 8 * 8);
}

TEST_CASE("identity spectral weights act as a low-pass projection") {
    const FnoArchitecture a{1, 1, 5, 1, 1, Activation::identity, false, 1.0};
    const Model m(a);
    ModelParams p(m.layout());
    p.block("lift.weight")[0] = 1.0;  // field channel only; coordinate channel weight stays 0
    auto sw = p.block("fourier0.spectral");
    for (std::size_t k = 0; k < 5; ++k) sw[2 * k] = 1.0;
    p.block("proj1.weight")[0] = 1.0;
    p.block("proj2.weight")[0] = 1.0;
    const StateShape s = StateShape::field1d(32, 2 * pi);
    const auto u = randn(32, 9);
    const auto y = m.apply(p, s, u);
    auto f = spectral::transform_forward(spectral::GridField(s, u));
    for (std::size_t k = 5; k < f.coeffs.size(); ++k) f.coeffs[k] = 0.0;
    const auto ref = spectral::transform_inverse(f);
    for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(y[i] - ref.values[i]) < 1e-13);
}

TEST_CASE("zero input maps to zero when biases and coordinate weights vanish") {
    const FnoArchitecture a{2, 4, 3, 2, 8, Activation::gelu, false, 1.0};
    const Model m(a);
    ModelParams p = m.init(1);
    for (const auto& b : p.layout.blocks())
        if (b.shape.size() == 1) std::fill(p.block(b).begin(), p.block(b).end(), 0.0);
    auto lw = p.block("lift.weight");
    std::fill(lw.begin() + 4, lw.end(), 0.0);
    const StateShape s = StateShape::field2d(8, 2 * pi);
    for (double v : m.apply(p, s, std::vector<double>(64, 0.0))) CHECK(v == 0.0);
}

TEST_CASE("residual mode with zero weights is the identity") {
    FnoArchitecture a{1, 4, 3, 2, 8, Activation::gelu, true, 2.0};
    const Model m(a);
    ModelParams p(m.layout());
    const auto u = randn(16, 5);
    CHECK(m.apply(p, StateShape::field1d(16, 1.0), u) == u);

    const Model f(FfnArchitecture{3, 3, 2, 5, Activation::gelu, true, 10.0});
    const std::vector<double> x{1, 2, 3};
    CHECK(f.apply(ModelParams(f.layout()), StateShape::vector(3), x) == x);
}

TEST_CASE("spectral weights are initialized inside the disk") {
    const FnoArchitecture a{2, 6, 3, 1, 4, Activation::gelu, false, 1.0};
    const Model m(a);
    const ModelParams p = m.init(12);
    const auto& b = p.layout.block("fourier0.spectral");
    const double r = 1.0 / (6 * 3.0);
    const auto* w = p.complex_block(b);
    double mx = 0;
    for (std::size_t i = 0; i < b.count / 2; ++i) mx = std::max(mx, std::abs(w[i]));
    CHECK(mx <= r);
    CHECK(mx > 0.8 * r);
    CHECK(m.init(12).values == p.values);
}

TEST_CASE("ffn gradients match central differences") {
    const Model m(FfnArchitecture{3, 3, 2, 8, Activation::gelu, false, 3.0});
    check_gradients(m, m.init(5), StateShape::vector(3), 4, 1e-6);
    const Model t(FfnArchitecture{3, 3, 3, 5, Activation::tanh, true, 1.0});
    check_gradients(t, t.init(6), StateShape::vector(3), 3, 1e-6);
}

TEST_CASE("fno 1D gradients match central differences") {
    const Model m(FnoArchitecture{1, 4, 3, 2, 8, Activation::gelu, false, 1.5});
    ModelParams p = m.init(7);
    // larger spectral weights so their gradients are not swamped
    for (const auto& b : p.layout.blocks())
        if (b.complex)
            for (double& v : p.block(b)) v *= 20;
    check_gradients(m, p, StateShape::field1d(16, 2 * pi), 2, 1e-5);
}

TEST_CASE("fno 2D gradients match central differences") {
    const Model m(FnoArchitecture{2, 3, 3, 2, 6, Activation::gelu, true, 1.0});
    ModelParams p = m.init(8);
    for (const auto& b : p.layout.blocks())
        if (b.complex)
            for (double& v : p.block(b)) v *= 20;
    check_gradients(m, p, StateShape::field2d(8, 2 * pi), 2, 1e-5);
}

TEST_CASE("fno output is consistent under band-limited upsampling") {
    const Model m(FnoArchitecture{1, 8, 6, 2, 16, Activation::gelu, false, 1.0});
    const ModelParams p = m.init(2);
    const StateShape s1 = StateShape::field1d(64, 2 * pi), s2 = StateShape::field1d(128, 2 * pi);
    // smooth input with content in the lowest modes only
    spectral::SpectralField f(s1);
    Rng rng(4);
    for (std::size_t k = 1; k < 6; ++k) f.coeffs[k] = {standard_normal(rng) / double(k), standard_normal(rng) / double(k)};
    const auto u1 = spectral::transform_inverse(f);
    spectral::SpectralField f2(s2);
    std::copy(f.coeffs.begin(), f.coeffs.end() - 1, f2.coeffs.begin());
    const auto u2 = spectral::transform_inverse(f2);
    const auto y1 = spectral::transform_forward(spectral::GridField(s1, m.apply(p, s1, u1.values)));
    const auto y2 = spectral::transform_forward(spectral::GridField(s2, m.apply(p, s2, u2.values)));
    double num = 0, den = 0;
    for (std::size_t k = 0; k < 32; ++k) {
        num += std::norm(y1.coeffs[k] - y2.coeffs[k]);
        den += std::norm(y1.coeffs[k]);
    }
    MESSAGE("relative change of shared modes " << std::sqrt(num / den));
    CHECK(std::sqrt(num / den) < 0.01);
}

TEST_CASE("shape validation") {
    const Model m(FnoArchitecture{1, 4, 12, 1, 4, Activation::gelu, false, 1.0});
    CHECK_THROWS_AS(m.check_shape(StateShape::field1d(16, 1.0)), ValidationError);
    CHECK_NOTHROW(m.check_shape(StateShape::field1d(32, 1.0)));
    CHECK_THROWS_AS(m.check_shape(StateShape::field2d(32, 1.0)), ValidationError);
    const Model f(FfnArchitecture{});
    CHECK_THROWS_AS(f.check_shape(StateShape::vector(4)), ValidationError);
    Tape empty;
    GradientBuffer g(f.layout());
    CHECK_THROWS_AS(f.backward(f.init(0), empty, std::vector<double>(3), g), ValidationError);
}
