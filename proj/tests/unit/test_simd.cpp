#include <doctest.h>

#include <cmath>
#include <vector>

#include "mno/core/rng.hpp"
#include "mno/simd/kernels.hpp"

using namespace mno;
using simd::Backend;
using simd::cplx;
using simd::Trans;

namespace {

struct BackendGuard {
    Backend saved = simd::active_backend();
    ~BackendGuard() { simd::set_backend(saved); }
};

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    fill_standard_normal(rng, v);
    return v;
}

std::vector<cplx> random_cvec(Rng& rng, std::size_t n) {
    std::vector<cplx> v(n);
    for (auto& z : v) z = cplx(standard_normal(rng), standard_normal(rng));
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// textbook triple loop, independent of both backends
void naive_gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
                const std::vector<double>& a, std::size_t lda, const std::vector<double>& b, std::size_t ldb,
                double beta, std::vector<double>& c, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            long double s = 0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ta == Trans::no ? a[i * lda + p] : a[p * lda + i];
                const double bv = tb == Trans::no ? b[p * ldb + j] : b[j * ldb + p];
                s += static_cast<long double>(av) * bv;
            }
            c[i * ldc + j] = static_cast<double>(alpha * s + (beta == 0.0 ? 0.0L : beta * c[i * ldc + j]));
        }
}

}  // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(simd::backend_available(Backend::scalar));
    BackendGuard g;
    simd::set_backend(Backend::scalar);
    CHECK(simd::active_backend() == Backend::scalar);
}

TEST_CASE("gemm matches a naive reference on both backends for all transposes") {
    BackendGuard guard;
    Rng rng(11);
    const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 8, 3}, {9, 17, 13}, {33, 150, 150}, {64, 3, 150}};
    for (Backend be : {Backend::scalar, Backend::avx2}) {
        if (!simd::backend_available(be)) continue;
        simd::set_backend(be);
        for (auto& s : shapes) {
            const std::size_t m = s[0], n = s[1], k = s[2];
            for (Trans ta : {Trans::no, Trans::yes})
                for (Trans tb : {Trans::no, Trans::yes})
                    for (double beta : {0.0, 0.7}) {
                        const std::size_t lda = (ta == Trans::no ? k : m) + 2;
                        const std::size_t ldb = (tb == Trans::no ? n : k) + 1;
                        const std::size_t ldc = n + 3;
                        auto a = random_vec(rng, (ta == Trans::no ? m : k) * lda);
                        auto b = random_vec(rng, (tb == Trans::no ? k : n) * ldb);
                        auto c = random_vec(rng, m * ldc);
                        auto ref = c;
                        simd::gemm(ta, tb, m, n, k, 1.3, a.data(), lda, b.data(), ldb, beta, c.data(), ldc);
                        naive_gemm(ta, tb, m, n, k, 1.3, a, lda, b, ldb, beta, ref, ldc);
                        CHECK(max_abs_diff(c, ref) < 1e-11 * static_cast<double>(k));
                    }
        }
    }
}

TEST_CASE("gemm with beta = 0 ignores NaN in the output buffer") {
    std::vector<double> a{1, 2, 3, 4}, b{1, 0, 0, 1}, c(4, std::nan(""));
    simd::gemm(Trans::no, Trans::no, 2, 2, 2, 1.0, a.data(), 2, b.data(), 2, 0.0, c.data(), 2);
    CHECK(c == a);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!simd::backend_available(Backend::avx2)) return;
    BackendGuard guard;
    Rng rng(5);

    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 1000u}) {
        auto x = random_vec(rng, n), y = random_vec(rng, n);
        simd::set_backend(Backend::scalar);
        const double d0 = simd::dot(x.data(), y.data(), n);
        auto y0 = y;
        simd::axpy(n, 0.3, x.data(), y0.data());
        simd::set_backend(Backend::avx2);
        const double d1 = simd::dot(x.data(), y.data(), n);
        auto y1 = y;
        simd::axpy(n, 0.3, x.data(), y1.data());
        CHECK(std::abs(d0 - d1) <= 1e-12 * (1.0 + static_cast<double>(n)));
        CHECK(max_abs_diff(y0, y1) <= 1e-15 * 8);
    }

    for (auto [ni, no] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {4, 4}, {32, 32}, {7, 33}}) {
        auto x = random_cvec(rng, ni), w = random_cvec(rng, ni * no), g = random_cvec(rng, no);
        auto y = random_cvec(rng, no);
        std::vector<cplx> y0 = y, y1 = y, x0(ni), x1(ni), w0 = w, w1 = w;
        simd::set_backend(Backend::scalar);
        simd::cvecmat_acc(ni, no, x.data(), w.data(), y0.data());
        simd::cmatvec_conj(ni, no, w.data(), g.data(), x0.data());
        simd::couter_conj_acc(ni, no, x.data(), g.data(), w0.data());
        simd::set_backend(Backend::avx2);
        simd::cvecmat_acc(ni, no, x.data(), w.data(), y1.data());
        simd::cmatvec_conj(ni, no, w.data(), g.data(), x1.data());
        simd::couter_conj_acc(ni, no, x.data(), g.data(), w1.data());
        CHECK(max_abs_diff(y0, y1) < 1e-12 * static_cast<double>(ni));
        CHECK(max_abs_diff(x0, x1) < 1e-12 * static_cast<double>(no));
        CHECK(max_abs_diff(w0, w1) < 1e-13);
    }
}

TEST_CASE("complex kernels match std::complex arithmetic") {
    Rng rng(9);
    const std::size_t ni = 5, no = 6;
    auto x = random_cvec(rng, ni), w = random_cvec(rng, ni * no), g = random_cvec(rng, no);
    std::vector<cplx> y(no), xr(ni), wacc(ni * no);
    simd::cvecmat_acc(ni, no, x.data(), w.data(), y.data());
    simd::cmatvec_conj(ni, no, w.data(), g.data(), xr.data());
    simd::couter_conj_acc(ni, no, x.data(), g.data(), wacc.data());
    for (std::size_t o = 0; o < no; ++o) {
        cplx s = 0;
        for (std::size_t i = 0; i < ni; ++i) s += x[i] * w[i * no + o];
        CHECK(std::abs(s - y[o]) < 1e-13);
    }
    for (std::size_t i = 0; i < ni; ++i) {
        cplx s = 0;
        for (std::size_t o = 0; o < no; ++o) s += std::conj(w[i * no + o]) * g[o];
        CHECK(std::abs(s - xr[i]) < 1e-13);
        for (std::size_t o = 0; o < no; ++o) CHECK(std::abs(wacc[i * no + o] - std::conj(x[i]) * g[o]) < 1e-14);
    }
}

TEST_CASE("adam update is bitwise identical across backends") {
    if (!simd::backend_available(Backend::avx2)) return;
    BackendGuard guard;
    Rng rng(3);
    const std::size_t n = 37;
    auto p = random_vec(rng, n), g = random_vec(rng, n);
    std::vector<double> m(n, 0.1), v(n, 0.2);
    const simd::AdamCoefficients c{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
    auto p0 = p, m0 = m, v0 = v, p1 = p, m1 = m, v1 = v;
    simd::set_backend(Backend::scalar);
    simd::adam_update(n, p0.data(), g.data(), m0.data(), v0.data(), c);
    simd::set_backend(Backend::avx2);
    simd::adam_update(n, p1.data(), g.data(), m1.data(), v1.data(), c);
    CHECK(p0 == p1);
    CHECK(m0 == m1);
    CHECK(v0 == v1);
}
