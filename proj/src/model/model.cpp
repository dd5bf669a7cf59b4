#include "mno/model/model.hpp"

#include <cmath>
#include <numbers>

#include "mno/core/error.hpp"
#include "mno/core/rng.hpp"
#include "mno/simd/kernels.hpp"
#include "mno/spectral/fft.hpp"

namespace mno::model {

using cplx = std::complex<double>;
using simd::Trans;

void FfnArchitecture::validate() const {
    require(input_dim >= 1 && output_dim >= 1, "model.input_dim and model.output_dim must be positive");
    require(hidden_width >= 1, "model.hidden_width must be at least 1");
    require(scale > 0.0, "model.scale must be positive");
    require(!residual || input_dim == output_dim, "residual mode needs input_dim == output_dim");
}

void FnoArchitecture::validate() const {
    require(dimension == 1 || dimension == 2, "model.dimension must be 1 or 2");
    require(width >= 1, "model.width must be at least 1");
    require(modes >= 1, "model.modes must be at least 1");
    require(n_layers >= 1, "model.n_layers must be at least 1");
    require(projection_width >= 1, "model.projection_width must be at least 1");
    require(scale > 0.0, "model.scale must be positive");
}

ParamLayout ffn_layout(const FfnArchitecture& a) {
    a.validate();
    ParamLayout l;
    std::size_t in = a.input_dim;
    for (std::size_t i = 0; i <= a.hidden_layers; ++i) {
        const std::size_t out = i == a.hidden_layers ? a.output_dim : a.hidden_width;
        l.add("layer" + std::to_string(i) + ".weight", {in, out});
        l.add("layer" + std::to_string(i) + ".bias", {out});
        in = out;
    }
    return l;
}

ParamLayout fno_layout(const FnoArchitecture& a) {
    a.validate();
    ParamLayout l;
    const std::size_t w = a.width;
    l.add("lift.weight", {a.in_channels(), w});
    l.add("lift.bias", {w});
    for (std::size_t i = 0; i < a.n_layers; ++i) {
        const std::string p = "fourier" + std::to_string(i);
        if (a.dimension == 2) {
            l.add(p + ".spectral", {2 * a.modes, a.modes, w, w}, true);
        } else {
            l.add(p + ".spectral", {a.modes, w, w}, true);
        }
        l.add(p + ".weight", {w, w});
        l.add(p + ".bias", {w});
    }
    l.add("proj1.weight", {w, a.projection_width});
    l.add("proj1.bias", {a.projection_width});
    l.add("proj2.weight", {a.projection_width, 1});
    l.add("proj2.bias", {1});
    return l;
}

std::vector<std::size_t> retained_mode_indices(const FnoArchitecture& a, std::size_t n) {
    std::vector<std::size_t> idx;
    if (a.dimension == 1) {
        for (std::size_t k = 0; k < a.modes; ++k) idx.push_back(k);
        return idx;
    }
    const std::size_t half = n / 2 + 1;
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < a.modes; ++k) rows.push_back(k);
    for (std::size_t k = a.modes; k >= 1; --k) rows.push_back(n - k);
    for (std::size_t r : rows)
        for (std::size_t kx = 0; kx < a.modes; ++kx) idx.push_back(r * half + kx);
    return idx;
}

namespace {

// y[rows x out] = x[rows x in] W + b
void affine_forward(const double* x, std::size_t rows, std::size_t in, std::size_t out, const double* w,
                    const double* b, double* y) {
    simd::gemm(Trans::no, Trans::no, rows, out, in, 1.0, x, in, w, out, 0.0, y, out);
    for (std::size_t r = 0; r < rows; ++r) {
        double* yr = y + r * out;
        for (std::size_t j = 0; j < out; ++j) yr[j] += b[j];
    }
}

// accumulates dW, db; writes dx when non-null
void affine_backward(const double* x, const double* dy, std::size_t rows, std::size_t in, std::size_t out,
                     const double* w, double* dw, double* db, double* dx) {
    simd::gemm(Trans::yes, Trans::no, in, out, rows, 1.0, x, in, dy, out, 1.0, dw, out);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* dyr = dy + r * out;
        for (std::size_t j = 0; j < out; ++j) db[j] += dyr[j];
    }
    if (dx) simd::gemm(Trans::no, Trans::yes, rows, in, out, 1.0, dy, out, w, out, 0.0, dx, in);
}

const double* data(const ModelParams& p, const std::string& name) { return p.block(name).data(); }
double* data(ModelParams& p, const std::string& name) { return p.block(name).data(); }

// ---- feedforward network ----

void ffn_forward(const FfnArchitecture& a, const ModelParams& p, const double* x, std::size_t batch, double* y,
                 Tape* tape) {
    const std::size_t L = a.hidden_layers;
    std::vector<double> cur(x, x + batch * a.input_dim), pre, act;
    if (tape) {
        tape->real.clear();
        tape->real.push_back(cur);
    }
    std::size_t in = a.input_dim;
    for (std::size_t i = 0; i < L; ++i) {
        const std::string name = "layer" + std::to_string(i);
        const std::size_t out = a.hidden_width;
        pre.resize(batch * out);
        affine_forward(cur.data(), batch, in, out, data(p, name + ".weight"), data(p, name + ".bias"), pre.data());
        act.resize(pre.size());
        activate(a.activation, pre, act);
        if (tape) {
            tape->real.push_back(pre);
            tape->real.push_back(act);
        }
        std::swap(cur, act);
        in = out;
    }
    const std::string name = "layer" + std::to_string(L);
    affine_forward(cur.data(), batch, in, a.output_dim, data(p, name + ".weight"), data(p, name + ".bias"), y);
}

void ffn_backward(const FfnArchitecture& a, const ModelParams& p, const Tape& t, const double* dy,
                  GradientBuffer& g, double* dx) {
    const std::size_t L = a.hidden_layers, batch = t.batch;
    const std::size_t w = a.hidden_width;
    std::vector<double> dcur, dprev;
    {
        const std::string name = "layer" + std::to_string(L);
        const std::size_t in = L == 0 ? a.input_dim : w;
        const double* xin = L == 0 ? t.real[0].data() : t.real[2 * L].data();
        double* dxin = nullptr;
        if (L > 0) {
            dcur.resize(batch * w);
            dxin = dcur.data();
        } else {
            dxin = dx;
        }
        affine_backward(xin, dy, batch, in, a.output_dim, data(p, name + ".weight"), data(g, name + ".weight"),
                        data(g, name + ".bias"), dxin);
    }
    for (std::size_t i = L; i-- > 0;) {
        const std::string name = "layer" + std::to_string(i);
        activate_backward(a.activation, t.real[1 + 2 * i], dcur);
        const std::size_t in = i == 0 ? a.input_dim : w;
        const double* xin = i == 0 ? t.real[0].data() : t.real[2 * i].data();
        double* dxin = nullptr;
        if (i > 0) {
            dprev.resize(batch * w);
            dxin = dprev.data();
        } else {
            dxin = dx;
        }
        affine_backward(xin, dcur.data(), batch, in, w, data(p, name + ".weight"), data(g, name + ".weight"),
                        data(g, name + ".bias"), dxin);
        std::swap(dcur, dprev);
    }
}

// ---- Fourier neural operator ----

struct FnoGeometry {
    StateShape shape;
    std::size_t points;
    std::size_t coeffs;
    std::vector<std::size_t> retained;
    std::vector<double> mult;  // multiplicity of each retained mode
};

FnoGeometry geometry(const FnoArchitecture& a, const StateShape& shape) {
    FnoGeometry g;
    g.shape = shape;
    g.points = shape.size();
    g.coeffs = spectral::spectral_size(shape);
    g.retained = retained_mode_indices(a, shape.n);
    const std::size_t half = shape.n / 2 + 1;
    for (std::size_t idx : g.retained) {
        const std::size_t kx = a.dimension == 2 ? idx % half : idx;
        g.mult.push_back(kx == 0 || kx == shape.n / 2 ? 1.0 : 2.0);
    }
    return g;
}

// z[b] += SpectralConv(v[b]) for each batch item; records the retained input coefficients
void spectral_conv_forward(const FnoArchitecture& a, const FnoGeometry& geo, const cplx* weights, const double* v,
                           std::size_t batch, double* z, std::vector<cplx>* saved) {
    const std::size_t w = a.width, m = geo.retained.size();
    std::vector<cplx> full(geo.coeffs * w), yfull(geo.coeffs * w), xr(m * w);
    std::vector<double> out(geo.points * w);
    if (saved) saved->resize(batch * m * w);
    for (std::size_t b = 0; b < batch; ++b) {
        spectral::forward(geo.shape, {v + b * geo.points * w, geo.points * w}, full, w);
        std::fill(yfull.begin(), yfull.end(), cplx(0.0));
        for (std::size_t k = 0; k < m; ++k) {
            const cplx* x = full.data() + geo.retained[k] * w;
            std::copy(x, x + w, xr.data() + k * w);
            simd::cvecmat_acc(w, w, x, weights + k * w * w, yfull.data() + geo.retained[k] * w);
        }
        if (saved) std::copy(xr.begin(), xr.end(), saved->data() + b * m * w);
        spectral::inverse(geo.shape, yfull, out, w);
        double* zb = z + b * geo.points * w;
        for (std::size_t i = 0; i < out.size(); ++i) zb[i] += out[i];
    }
}

// accumulates the weight gradient and dv[b] += adjoint applied to dz[b]
void spectral_conv_backward(const FnoArchitecture& a, const FnoGeometry& geo, const cplx* weights,
                            const std::vector<cplx>& saved, const double* dz, std::size_t batch, cplx* dweights,
                            double* dv) {
    const std::size_t w = a.width, m = geo.retained.size();
    const double p = static_cast<double>(geo.points);
    std::vector<cplx> full(geo.coeffs * w), gx(geo.coeffs * w), gk(w);
    std::vector<double> out(geo.points * w);
    for (std::size_t b = 0; b < batch; ++b) {
        spectral::forward(geo.shape, {dz + b * geo.points * w, geo.points * w}, full, w);
        std::fill(gx.begin(), gx.end(), cplx(0.0));
        for (std::size_t k = 0; k < m; ++k) {
            const double c = geo.mult[k];
            const cplx* g = full.data() + geo.retained[k] * w;
            // adjoint of the inverse transform: multiplicity times the unnormalized forward transform
            for (std::size_t o = 0; o < w; ++o) gk[o] = (c * p) * g[o];
            simd::couter_conj_acc(w, w, saved.data() + (b * m + k) * w, gk.data(), dweights + k * w * w);
            cplx* dst = gx.data() + geo.retained[k] * w;
            simd::cmatvec_conj(w, w, weights + k * w * w, gk.data(), dst);
            // adjoint of the scaled forward transform: inverse(g / c) / P
            for (std::size_t i = 0; i < w; ++i) dst[i] /= c * p;
        }
        spectral::inverse(geo.shape, gx, out, w);
        double* dvb = dv + b * geo.points * w;
        for (std::size_t i = 0; i < out.size(); ++i) dvb[i] += out[i];
    }
}

void fno_forward(const FnoArchitecture& a, const ModelParams& p, const StateShape& shape, const double* x,
                 std::size_t batch, double* y, Tape* tape) {
    const FnoGeometry geo = geometry(a, shape);
    const std::size_t w = a.width, cin = a.in_channels(), rows = batch * geo.points;
    const std::size_t n = shape.n;

    std::vector<double> feat(rows * cin);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t pt = 0; pt < geo.points; ++pt) {
            double* f = feat.data() + (b * geo.points + pt) * cin;
            f[0] = x[b * geo.points + pt];
            f[1] = static_cast<double>(pt % n) / static_cast<double>(n);
            if (a.dimension == 2) f[2] = static_cast<double>(pt / n) / static_cast<double>(n);
        }
    std::vector<double> v(rows * w), z(rows * w);
    affine_forward(feat.data(), rows, cin, w, data(p, "lift.weight"), data(p, "lift.bias"), v.data());
    if (tape) {
        tape->real.clear();
        tape->spectral.clear();
        tape->real.push_back(feat);
        tape->real.push_back(v);
    }
    for (std::size_t l = 0; l < a.n_layers; ++l) {
        const std::string name = "fourier" + std::to_string(l);
        const ParamBlock& sb = p.layout.block(name + ".spectral");
        affine_forward(v.data(), rows, w, w, data(p, name + ".weight"), data(p, name + ".bias"), z.data());
        std::vector<cplx> saved;
        spectral_conv_forward(a, geo, p.complex_block(sb), v.data(), batch, z.data(), tape ? &saved : nullptr);
        activate(a.activation, z, v);
        if (tape) {
            tape->spectral.push_back(std::move(saved));
            tape->real.push_back(z);
            tape->real.push_back(v);
        }
    }
    const std::size_t pw = a.projection_width;
    std::vector<double> hp(rows * pw), ha(rows * pw);
    affine_forward(v.data(), rows, w, pw, data(p, "proj1.weight"), data(p, "proj1.bias"), hp.data());
    activate(a.activation, hp, ha);
    affine_forward(ha.data(), rows, pw, 1, data(p, "proj2.weight"), data(p, "proj2.bias"), y);
    if (tape) {
        tape->real.push_back(std::move(hp));
        tape->real.push_back(std::move(ha));
    }
}

void fno_backward(const FnoArchitecture& a, const ModelParams& p, const Tape& t, const double* dy,
                  GradientBuffer& g, double* dx) {
    const FnoGeometry geo = geometry(a, t.shape);
    const std::size_t w = a.width, cin = a.in_channels(), batch = t.batch, rows = batch * geo.points;
    const std::size_t pw = a.projection_width, L = a.n_layers;
    const auto& hp = t.real[2 + 2 * L];
    const auto& ha = t.real[3 + 2 * L];

    std::vector<double> dha(rows * pw), dv(rows * w), dz(rows * w);
    affine_backward(ha.data(), dy, rows, pw, 1, data(p, "proj2.weight"), data(g, "proj2.weight"),
                    data(g, "proj2.bias"), dha.data());
    activate_backward(a.activation, hp, dha);
    affine_backward(t.real[1 + 2 * L].data(), dha.data(), rows, w, pw, data(p, "proj1.weight"),
                    data(g, "proj1.weight"), data(g, "proj1.bias"), dv.data());
    for (std::size_t l = L; l-- > 0;) {
        const std::string name = "fourier" + std::to_string(l);
        const ParamBlock& sb = p.layout.block(name + ".spectral");
        dz = dv;
        activate_backward(a.activation, t.real[2 + 2 * l], dz);
        const double* vin = t.real[1 + 2 * l].data();
        affine_backward(vin, dz.data(), rows, w, w, data(p, name + ".weight"), data(g, name + ".weight"),
                        data(g, name + ".bias"), dv.data());
        spectral_conv_backward(a, geo, p.complex_block(sb), t.spectral[l], dz.data(), batch, g.complex_block(sb),
                               dv.data());
    }
    std::vector<double> dfeat(dx ? rows * cin : 0);
    affine_backward(t.real[0].data(), dv.data(), rows, cin, w, data(p, "lift.weight"), data(g, "lift.weight"),
                    data(g, "lift.bias"), dx ? dfeat.data() : nullptr);
    if (dx)
        for (std::size_t r = 0; r < rows; ++r) dx[r] = dfeat[r * cin];
}

}  // namespace

Model::Model(const FfnArchitecture& arch) : arch_(arch), layout_(ffn_layout(arch)) {}

Model::Model(const FnoArchitecture& arch) : arch_(arch), layout_(fno_layout(arch)) {}

bool Model::residual() const { return is_fno() ? fno().residual : ffn().residual; }

double Model::scale() const { return is_fno() ? fno().scale : ffn().scale; }

void Model::set_scale(double s) {
    require(s > 0.0, "model scale must be positive");
    std::visit([s](auto& a) { a.scale = s; }, arch_);
}

void Model::set_residual(bool r) {
    std::visit([r](auto& a) { a.residual = r; }, arch_);
    std::visit([](const auto& a) { a.validate(); }, arch_);
}

ModelParams Model::init(std::uint64_t seed) const {
    ModelParams p(layout_);
    Rng rng(seed);
    for (const ParamBlock& b : layout_.blocks()) {
        auto vals = p.block(b);
        if (b.complex) {
            const FnoArchitecture& a = fno();
            const double radius = 1.0 / (static_cast<double>(a.width) *
                                         std::pow(static_cast<double>(a.modes), a.dimension / 2.0));
            for (std::size_t i = 0; i < vals.size(); i += 2) {
                const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
                const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
                vals[i] = r * std::cos(th);
                vals[i + 1] = r * std::sin(th);
            }
            continue;
        }
        // weights are [in][out]; a bias follows its weight and shares the fan-in
        const bool is_bias = b.shape.size() == 1;
        const std::size_t fan_in = is_bias ? layout_.blocks()[&b - layout_.blocks().data() - 1].shape[0] : b.shape[0];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : vals) v = uniform(rng, -bound, bound);
    }
    return p;
}

void Model::check_shape(const StateShape& shape) const {
    if (!is_fno()) {
        require(shape.kind == StateKind::vector && shape.n == ffn().input_dim && shape.n == ffn().output_dim,
                "feedforward model expects vector states of dimension " + std::to_string(ffn().input_dim));
        return;
    }
    const FnoArchitecture& a = fno();
    require(shape.is_field() && shape.dimension() == a.dimension,
            "Fourier operator of dimension " + std::to_string(a.dimension) + " got a different state kind");
    require(is_power_of_two(shape.n), "grid resolution must be a power of two");
    require(shape.n >= 2 * a.modes, "resolution " + std::to_string(shape.n) + " is too small for " +
                                        std::to_string(a.modes) + " modes (needs >= 2 * modes)");
}

void Model::forward(const ModelParams& params, const StateShape& shape, std::span<const double> in,
                    std::size_t batch, std::span<double> out, Tape* tape) const {
    check_shape(shape);
    require(params.layout == layout_, "parameters do not match the model layout");
    const std::size_t d = shape.size();
    require(in.size() == batch * d && out.size() == batch * d, "model forward: buffer size mismatch");
    const double s = scale();
    std::vector<double> x(in.begin(), in.end());
    for (double& v : x) v /= s;
    if (tape) {
        tape->shape = shape;
        tape->batch = batch;
    }
    if (is_fno()) {
        fno_forward(fno(), params, shape, x.data(), batch, out.data(), tape);
    } else {
        ffn_forward(ffn(), params, x.data(), batch, out.data(), tape);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * out[i] + (residual() ? in[i] : 0.0);
}

void Model::backward(const ModelParams& params, const Tape& tape, std::span<const double> dout,
                     GradientBuffer& grad, std::span<double> din) const {
    require(!tape.real.empty(), "backward pass needs a recorded forward tape");
    require(grad.layout == layout_, "gradient buffer does not match the model layout");
    const std::size_t d = tape.shape.size();
    require(dout.size() == tape.batch * d, "model backward: cotangent size mismatch");
    require(din.empty() || din.size() == dout.size(), "model backward: input cotangent size mismatch");
    const double s = scale();
    std::vector<double> dy(dout.begin(), dout.end());
    for (double& v : dy) v *= s;
    std::vector<double> dx(din.empty() ? 0 : dy.size());
    double* dxp = din.empty() ? nullptr : dx.data();
    if (is_fno()) {
        fno_backward(fno(), params, tape, dy.data(), grad, dxp);
    } else {
        ffn_backward(ffn(), params, tape, dy.data(), grad, dxp);
    }
    if (!din.empty())
        for (std::size_t i = 0; i < din.size(); ++i) din[i] = dx[i] / s + (residual() ? dout[i] : 0.0);
}

std::vector<double> Model::apply(const ModelParams& params, const StateShape& shape,
                                 std::span<const double> u) const {
    std::vector<double> out(u.size());
    forward(params, shape, u, 1, out);
    return out;
}

}  // namespace mno::model
