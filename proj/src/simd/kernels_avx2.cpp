// AVX2/FMA variants. Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "kernel_table.hpp"

namespace mno::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline void store_row(double* c, __m256d acc, __m256d valpha, __m256d vbeta, bool use_beta) {
    __m256d r = _mm256_mul_pd(valpha, acc);
    if (use_beta) r = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(c), r);
    _mm256_storeu_pd(c, r);
}

// 4 rows x 8 columns register block; every C element accumulates over p in ascending order.
void gemm_core(std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a, std::size_t rs,
               std::size_t cs, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    const bool use_beta = beta != 0.0;
    const __m256d valpha = _mm256_set1_pd(alpha);
    const __m256d vbeta = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + i * rs;
        const double* a1 = a0 + rs;
        const double* a2 = a1 + rs;
        const double* a3 = a2 + rs;
        std::size_t j = 0;
        for (; j + 8 <= n; j += 8) {
            __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
            __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
            __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
            __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p) {
                const double* bp = b + p * ldb + j;
                const __m256d b0 = _mm256_loadu_pd(bp);
                const __m256d b1 = _mm256_loadu_pd(bp + 4);
                const std::size_t ap = p * cs;
                __m256d av = _mm256_broadcast_sd(a0 + ap);
                c00 = _mm256_fmadd_pd(av, b0, c00);
                c01 = _mm256_fmadd_pd(av, b1, c01);
                av = _mm256_broadcast_sd(a1 + ap);
                c10 = _mm256_fmadd_pd(av, b0, c10);
                c11 = _mm256_fmadd_pd(av, b1, c11);
                av = _mm256_broadcast_sd(a2 + ap);
                c20 = _mm256_fmadd_pd(av, b0, c20);
                c21 = _mm256_fmadd_pd(av, b1, c21);
                av = _mm256_broadcast_sd(a3 + ap);
                c30 = _mm256_fmadd_pd(av, b0, c30);
                c31 = _mm256_fmadd_pd(av, b1, c31);
            }
            double* cr = c + i * ldc + j;
            store_row(cr, c00, valpha, vbeta, use_beta);
            store_row(cr + 4, c01, valpha, vbeta, use_beta);
            cr += ldc;
            store_row(cr, c10, valpha, vbeta, use_beta);
            store_row(cr + 4, c11, valpha, vbeta, use_beta);
            cr += ldc;
            store_row(cr, c20, valpha, vbeta, use_beta);
            store_row(cr + 4, c21, valpha, vbeta, use_beta);
            cr += ldc;
            store_row(cr, c30, valpha, vbeta, use_beta);
            store_row(cr + 4, c31, valpha, vbeta, use_beta);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
            __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p) {
                const __m256d bv = _mm256_loadu_pd(b + p * ldb + j);
                const std::size_t ap = p * cs;
                c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a0 + ap), bv, c0);
                c1 = _mm256_fmadd_pd(_mm256_broadcast_sd(a1 + ap), bv, c1);
                c2 = _mm256_fmadd_pd(_mm256_broadcast_sd(a2 + ap), bv, c2);
                c3 = _mm256_fmadd_pd(_mm256_broadcast_sd(a3 + ap), bv, c3);
            }
            double* cr = c + i * ldc + j;
            store_row(cr, c0, valpha, vbeta, use_beta);
            store_row(cr + ldc, c1, valpha, vbeta, use_beta);
            store_row(cr + 2 * ldc, c2, valpha, vbeta, use_beta);
            store_row(cr + 3 * ldc, c3, valpha, vbeta, use_beta);
        }
        for (; j < n; ++j) {
            for (std::size_t r = 0; r < 4; ++r) {
                const double* ar = a + (i + r) * rs;
                double s = 0.0;
                for (std::size_t p = 0; p < k; ++p) s = std::fma(ar[p * cs], b[p * ldb + j], s);
                double& cij = c[(i + r) * ldc + j];
                cij = use_beta ? std::fma(beta, cij, alpha * s) : alpha * s;
            }
        }
    }
    for (; i < m; ++i) {
        const double* ar = a + i * rs;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p)
                acc = _mm256_fmadd_pd(_mm256_broadcast_sd(ar + p * cs), _mm256_loadu_pd(b + p * ldb + j), acc);
            store_row(c + i * ldc + j, acc, valpha, vbeta, use_beta);
        }
        for (; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s = std::fma(ar[p * cs], b[p * ldb + j], s);
            double& cij = c[i * ldc + j];
            cij = use_beta ? std::fma(beta, cij, alpha * s) : alpha * s;
        }
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    }
    for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s = std::fma(x[i], y[i], s);
    return s;
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

// Complex values are interleaved (re, im); one __m256d holds two of them.
inline __m256d swap_pairs(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

void cvecmat_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* w, cplx* y) {
    const double* wd = reinterpret_cast<const double*>(w);
    double* yd = reinterpret_cast<double*>(y);
    std::size_t o = 0;
    for (; o + 2 <= n_out; o += 2) {
        __m256d acc = _mm256_loadu_pd(yd + 2 * o);
        for (std::size_t i = 0; i < n_in; ++i) {
            const __m256d xr = _mm256_set1_pd(x[i].real());
            const __m256d xi = _mm256_set1_pd(x[i].imag());
            const __m256d wv = _mm256_loadu_pd(wd + 2 * (i * n_out + o));
            acc = _mm256_add_pd(acc, _mm256_fmaddsub_pd(xr, wv, _mm256_mul_pd(xi, swap_pairs(wv))));
        }
        _mm256_storeu_pd(yd + 2 * o, acc);
    }
    for (; o < n_out; ++o) {
        double yr = y[o].real(), yi = y[o].imag();
        for (std::size_t i = 0; i < n_in; ++i) {
            const cplx wv = w[i * n_out + o];
            yr += x[i].real() * wv.real() - x[i].imag() * wv.imag();
            yi += x[i].real() * wv.imag() + x[i].imag() * wv.real();
        }
        y[o] = cplx(yr, yi);
    }
}

void cmatvec_conj(std::size_t n_in, std::size_t n_out, const cplx* w, const cplx* g, cplx* x) {
    const double* wd = reinterpret_cast<const double*>(w);
    const double* gd = reinterpret_cast<const double*>(g);
    for (std::size_t i = 0; i < n_in; ++i) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t o = 0;
        for (; o + 2 <= n_out; o += 2) {
            const __m256d wv = _mm256_loadu_pd(wd + 2 * (i * n_out + o));
            const __m256d gv = _mm256_loadu_pd(gd + 2 * o);
            const __m256d wr = _mm256_movedup_pd(wv);
            const __m256d wi = _mm256_permute_pd(wv, 0b1111);
            // even lanes: wr*gr + wi*gi, odd lanes: wr*gi - wi*gr
            acc = _mm256_add_pd(acc, _mm256_fmsubadd_pd(wr, gv, _mm256_mul_pd(wi, swap_pairs(gv))));
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        double sr = lanes[0] + lanes[2], si = lanes[1] + lanes[3];
        for (; o < n_out; ++o) {
            const cplx wv = w[i * n_out + o];
            sr += wv.real() * g[o].real() + wv.imag() * g[o].imag();
            si += wv.real() * g[o].imag() - wv.imag() * g[o].real();
        }
        x[i] = cplx(sr, si);
    }
}

void couter_conj_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* g, cplx* w) {
    const double* gd = reinterpret_cast<const double*>(g);
    double* wd = reinterpret_cast<double*>(w);
    for (std::size_t i = 0; i < n_in; ++i) {
        const __m256d xr = _mm256_set1_pd(x[i].real());
        const __m256d nxi = _mm256_set1_pd(-x[i].imag());
        std::size_t o = 0;
        for (; o + 2 <= n_out; o += 2) {
            const __m256d gv = _mm256_loadu_pd(gd + 2 * o);
            double* wp = wd + 2 * (i * n_out + o);
            const __m256d term = _mm256_fmaddsub_pd(xr, gv, _mm256_mul_pd(nxi, swap_pairs(gv)));
            _mm256_storeu_pd(wp, _mm256_add_pd(_mm256_loadu_pd(wp), term));
        }
        for (; o < n_out; ++o) {
            cplx& wv = w[i * n_out + o];
            wv = cplx(wv.real() + (x[i].real() * g[o].real() + x[i].imag() * g[o].imag()),
                      wv.imag() + (x[i].real() * g[o].imag() - x[i].imag() * g[o].real()));
        }
    }
}

// No FMAs here: the update is bitwise identical to the scalar reference.
void adam_update(std::size_t n, double* p, const double* g, double* m, double* v, const AdamCoefficients& c) {
    const __m256d b1 = _mm256_set1_pd(c.beta1), b1c = _mm256_set1_pd(1.0 - c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2), b2c = _mm256_set1_pd(1.0 - c.beta2);
    const __m256d bc1 = _mm256_set1_pd(c.bias_correction1), bc2 = _mm256_set1_pd(c.bias_correction2);
    const __m256d lr = _mm256_set1_pd(c.lr), eps = _mm256_set1_pd(c.eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(b1c, gv));
        const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(b2c, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, bc1);
        const __m256d vhat = _mm256_div_pd(vv, bc2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g[i] * g[i]);
        const double mhat = m[i] / c.bias_correction1;
        const double vhat = v[i] / c.bias_correction2;
        p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{gemm_core, dot, axpy, cvecmat_acc, cmatvec_conj, couter_conj_acc, adam_update};
    return &table;
}

}  // namespace mno::simd::detail
