#pragma once

#include "mno/simd/kernels.hpp"

namespace mno::simd::detail {

// op(A) element (i, p) lives at a[i * row_stride + p * col_stride]; B is k x n with leading dim ldb.
using GemmCore = void (*)(std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
                          std::size_t row_stride, std::size_t col_stride, const double* b, std::size_t ldb,
                          double beta, double* c, std::size_t ldc);

struct KernelTable {
    GemmCore gemm_core;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(std::size_t, double, const double*, double*);
    void (*cvecmat_acc)(std::size_t, std::size_t, const cplx*, const cplx*, cplx*);
    void (*cmatvec_conj)(std::size_t, std::size_t, const cplx*, const cplx*, cplx*);
    void (*couter_conj_acc)(std::size_t, std::size_t, const cplx*, const cplx*, cplx*);
    void (*adam_update)(std::size_t, double*, const double*, double*, double*, const AdamCoefficients&);
};

const KernelTable& scalar_table();
// nullptr when the build has no AVX2 variant
const KernelTable* avx2_table();

}  // namespace mno::simd::detail
