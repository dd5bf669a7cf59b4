#include "mno/spectral/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "mno/core/error.hpp"

namespace mno::spectral {
namespace {

struct PlanKey {
    int dim;
    int n;
    int channels;
    bool forward;
    auto operator<=>(const PlanKey&) const = default;
};

std::mutex g_plan_mutex;

// Plans are created once and kept for the life of the process. Planning is not
// thread-safe in FFTW, execution with the new-array interface is.
fftw_plan get_plan(const PlanKey& key) {
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    int dims[2] = {key.n, key.n};
    const std::size_t points = key.dim == 2 ? std::size_t(key.n) * key.n : std::size_t(key.n);
    const std::size_t modes = key.dim == 2 ? std::size_t(key.n) * (key.n / 2 + 1) : std::size_t(key.n / 2 + 1);
    double* r = fftw_alloc_real(points * key.channels);
    fftw_complex* c = fftw_alloc_complex(modes * key.channels);
    fftw_plan plan;
    if (key.forward) {
        plan = fftw_plan_many_dft_r2c(key.dim, dims, key.channels, r, nullptr, key.channels, 1, c, nullptr,
                                      key.channels, 1, FFTW_ESTIMATE);
    } else {
        plan = fftw_plan_many_dft_c2r(key.dim, dims, key.channels, c, nullptr, key.channels, 1, r, nullptr,
                                      key.channels, 1, FFTW_ESTIMATE);
    }
    fftw_free(r);
    fftw_free(c);
    if (!plan) throw NumericalError("FFTW could not create a plan");
    cache.emplace(key, plan);
    return plan;
}

// FFTW requires new-array execution on buffers aligned like the planning buffers.
struct Scratch {
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    std::size_t real_cap = 0;
    std::size_t cplx_cap = 0;
    ~Scratch() {
        if (real) fftw_free(real);
        if (cplx) fftw_free(cplx);
    }
    double* reals(std::size_t n) {
        if (n > real_cap) {
            if (real) fftw_free(real);
            real = fftw_alloc_real(n);
            real_cap = n;
        }
        return real;
    }
    fftw_complex* complexes(std::size_t n) {
        if (n > cplx_cap) {
            if (cplx) fftw_free(cplx);
            cplx = fftw_alloc_complex(n);
            cplx_cap = n;
        }
        return cplx;
    }
};

thread_local Scratch t_scratch;

void check_shape(const StateShape& shape) {
    require(shape.is_field(), "spectral transform needs a field state");
    require(is_power_of_two(shape.n) && shape.n >= 2, "grid resolution must be a power of two");
}

}  // namespace

std::size_t spectral_size(const StateShape& shape) {
    return shape.dimension() == 2 ? shape.n * (shape.n / 2 + 1) : shape.n / 2 + 1;
}

std::size_t grid_size(const StateShape& shape) { return shape.dimension() == 2 ? shape.n * shape.n : shape.n; }

void forward(const StateShape& shape, std::span<const double> in, std::span<cplx> out, std::size_t channels) {
    check_shape(shape);
    const std::size_t points = grid_size(shape) * channels;
    const std::size_t modes = spectral_size(shape) * channels;
    require(in.size() == points && out.size() == modes, "forward transform: buffer size mismatch");
    const fftw_plan plan = get_plan({shape.dimension(), int(shape.n), int(channels), true});
    double* r = t_scratch.reals(points);
    fftw_complex* c = t_scratch.complexes(modes);
    std::memcpy(r, in.data(), points * sizeof(double));
    fftw_execute_dft_r2c(plan, r, c);
    const double scale = 1.0 / static_cast<double>(grid_size(shape));
    for (std::size_t i = 0; i < modes; ++i) out[i] = cplx(c[i][0] * scale, c[i][1] * scale);
}

void inverse(const StateShape& shape, std::span<const cplx> in, std::span<double> out, std::size_t channels) {
    check_shape(shape);
    const std::size_t points = grid_size(shape) * channels;
    const std::size_t modes = spectral_size(shape) * channels;
    require(in.size() == modes && out.size() == points, "inverse transform: buffer size mismatch");
    const fftw_plan plan = get_plan({shape.dimension(), int(shape.n), int(channels), false});
    double* r = t_scratch.reals(points);
    fftw_complex* c = t_scratch.complexes(modes);
    std::memcpy(static_cast<void*>(c), in.data(), modes * sizeof(fftw_complex));

    const std::size_t n = shape.n;
    const std::size_t half = n / 2 + 1;
    if (shape.dimension() == 1) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
            c[ch][1] = 0.0;
            c[(half - 1) * channels + ch][1] = 0.0;
        }
    } else {
        // Hermitian projection of the kx = 0 and kx = N/2 columns
        for (std::size_t kx : {std::size_t(0), half - 1}) {
            for (std::size_t ky = 0; ky <= n / 2; ++ky) {
                const std::size_t my = (n - ky) % n;
                for (std::size_t ch = 0; ch < channels; ++ch) {
                    double* a = c[(ky * half + kx) * channels + ch];
                    double* b = c[(my * half + kx) * channels + ch];
                    const double re = 0.5 * (a[0] + b[0]);
                    const double im = 0.5 * (a[1] - b[1]);
                    a[0] = re;
                    a[1] = im;
                    b[0] = re;
                    b[1] = -im;
                }
            }
        }
    }
    fftw_execute_dft_c2r(plan, c, r);
    std::memcpy(out.data(), r, points * sizeof(double));
}

}  // namespace mno::spectral
