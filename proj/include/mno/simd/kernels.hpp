#pragma once

// Dense inner-loop kernels. Every kernel has a scalar reference implementation and
// an AVX2/FMA variant; the variant is chosen once at runtime from CPU features and
// can be pinned with MNO_SIMD=scalar|avx2 or set_backend().

#include <complex>
#include <cstddef>

namespace mno::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };
enum class Trans { no, yes };

const char* to_string(Backend b);
bool backend_available(Backend b);
Backend active_backend();
/// Throws ValidationError if the backend is not available on this CPU/build.
void set_backend(Backend b);

/// C = alpha * op(A) * op(B) + beta * C with row-major storage.
/// op(A) is m x k, op(B) is k x n. beta == 0 ignores the previous contents of C.
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);

double dot(const double* x, const double* y, std::size_t n);

/// y += a * x
void axpy(std::size_t n, double a, const double* x, double* y);

/// y[o] += sum_i x[i] * w[i * n_out + o]
void cvecmat_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* w, cplx* y);

/// x[i] = sum_o conj(w[i * n_out + o]) * g[o]
void cmatvec_conj(std::size_t n_in, std::size_t n_out, const cplx* w, const cplx* g, cplx* x);

/// w[i * n_out + o] += conj(x[i]) * g[o]
void couter_conj_acc(std::size_t n_in, std::size_t n_out, const cplx* x, const cplx* g, cplx* w);

struct AdamCoefficients {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

/// Bias-corrected Adam update of n parameters in place.
void adam_update(std::size_t n, double* params, const double* grads, double* m, double* v,
                 const AdamCoefficients& c);

}  // namespace mno::simd
