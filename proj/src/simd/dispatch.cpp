#include <atomic>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "kernel_table.hpp"
#include "mno/core/error.hpp"

namespace mno::simd {
namespace detail {
#ifndef MNO_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const detail::KernelTable* table_for(Backend b) {
    if (b == Backend::scalar) return &detail::scalar_table();
    return cpu_has_avx2() ? detail::avx2_table() : nullptr;
}

Backend initial_backend() {
    if (const char* env = std::getenv("MNO_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    }
    return table_for(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::atomic<const detail::KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const detail::KernelTable& table() {
    const detail::KernelTable* t = g_table.load(std::memory_order_acquire);
    if (!t) {
        const Backend b = initial_backend();
        g_backend.store(b);
        t = table_for(b);
        g_table.store(t, std::memory_order_release);
    }
    return *t;
}

}  // namespace

const char* to_string(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend active_backend() {
    table();
    return g_backend.load();
}

void set_backend(Backend b) {
    const detail::KernelTable* t = table_for(b);
    if (!t) throw ValidationError(std::string("SIMD backend '") + to_string(b) + "' is not available");
    g_backend.store(b);
    g_table.store(t, std::memory_order_release);
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    if (m == 0 || n == 0) return;
    const std::size_t rs = ta == Trans::no ? lda : 1;
    const std::size_t cs = ta == Trans::no ? 1 : lda;
    if (tb == Trans::no) {
        table().gemm_core(m, n, k, alpha, a, rs, cs, b, ldb, beta, c, ldc);
        return;
    }
    // pack op(B) = B^T into a contiguous k x n panel
    thread_local std::vector<double> packed;
    packed.resize(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) packed[p * n + j] = b[j * ldb + p];
    table().gemm_core(m, n, k, alpha, a, rs, cs, packed.data(), n, beta, c, ldc);
}

double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }

void axpy(std::size_t n, double a, const double* x, double* y) { table().axpy(n, a, x, y); }

void cvecmat_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* w, cplx* y) {
    table().cvecmat_acc(n_in, n_out, x, w, y);
}

void cmatvec_conj(std::size_t n_in, std::size_t n_out, const cplx* w, const cplx* g, cplx* x) {
    table().cmatvec_conj(n_in, n_out, w, g, x);
}

void couter_conj_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* g, cplx* w) {
    table().couter_conj_acc(n_in, n_out, x, g, w);
}

void adam_update(std::size_t n, double* params, const double* grads, double* m, double* v,
                 const AdamCoefficients& c) {
    table().adam_update(n, params, grads, m, v, c);
}

}  // namespace mno::simd
