// Reference kernels. Summation order is fixed (ascending index) and nothing here may be
// contracted into FMAs; the AVX2 variants are tested against these.

#include <cmath>
#include <vector>

#include "kernel_table.hpp"

namespace mno::simd::detail {
namespace {

void gemm_core(std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a, std::size_t rs,
               std::size_t cs, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    thread_local std::vector<double> acc;
    acc.resize(n);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * rs + p * cs];
            const double* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
        }
        double* crow = c + i * ldc;
        if (beta == 0.0) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = alpha * acc[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] = alpha * acc[j] + beta * crow[j];
        }
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void cvecmat_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* w, cplx* y) {
    for (std::size_t i = 0; i < n_in; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const cplx* wrow = w + i * n_out;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double wr = wrow[o].real(), wi = wrow[o].imag();
            y[o] = cplx(y[o].real() + (xr * wr - xi * wi), y[o].imag() + (xr * wi + xi * wr));
        }
    }
}

void cmatvec_conj(std::size_t n_in, std::size_t n_out, const cplx* w, const cplx* g, cplx* x) {
    for (std::size_t i = 0; i < n_in; ++i) {
        double sr = 0.0, si = 0.0;
        const cplx* wrow = w + i * n_out;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double wr = wrow[o].real(), wi = wrow[o].imag();
            sr += wr * g[o].real() + wi * g[o].imag();
            si += wr * g[o].imag() - wi * g[o].real();
        }
        x[i] = cplx(sr, si);
    }
}

void couter_conj_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* g, cplx* w) {
    for (std::size_t i = 0; i < n_in; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        cplx* wrow = w + i * n_out;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double gr = g[o].real(), gi = g[o].imag();
            wrow[o] = cplx(wrow[o].real() + (xr * gr + xi * gi), wrow[o].imag() + (xr * gi - xi * gr));
        }
    }
}

void adam_update(std::size_t n, double* p, const double* g, double* m, double* v, const AdamCoefficients& c) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g[i] * g[i]);
        const double mhat = m[i] / c.bias_correction1;
        const double vhat = v[i] / c.bias_correction2;
        p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{gemm_core, dot, axpy, cvecmat_acc, cmatvec_conj, couter_conj_acc, adam_update};
    return table;
}

}  // namespace mno::simd::detail
