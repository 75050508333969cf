#pragma once
// Low-level dense kernels with scalar reference implementations and an AVX2
// variant selected at runtime.  Every numeric routine above this layer funnels
// its inner loops through the dispatch table so the SIMD path is exercised
// uniformly and can be swapped out (ASCHWARZ_SIMD=scalar|avx2|auto) without
// recompiling.

#include <cstddef>

namespace aschwarz::kern {

/** Dispatch table of hot inner-loop kernels (all double precision). */
struct Ops {
    /** y[i] += a * x[i] */
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    /** x[i] *= a */
    void (*scal)(std::size_t n, double a, double* x);
    /** sum_i x[i] * y[i] */
    double (*dot)(std::size_t n, const double* x, const double* y);
    /** sum_i x[i]^2 */
    double (*nrm2sq)(std::size_t n, const double* x);
    /** max_i |x[i]| */
    double (*max_abs)(std::size_t n, const double* x);
    /** y[i] = a * x[i] + b * y[i] */
    void (*axpby)(std::size_t n, double a, const double* x, double b, double* y);
    /** C(m x n) += alpha * A(m x k) * B(k x n), row-major with leading dims. */
    void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k, double alpha,
                     const double* A, std::size_t lda,
                     const double* B, std::size_t ldb,
                     double* C, std::size_t ldc);
    /** y(m) = A(m x n) * x(n), row-major. */
    void (*gemv)(std::size_t m, std::size_t n, const double* A, std::size_t lda,
                 const double* x, double* y);
    /** Implementation name ("scalar" or "avx2"). */
    const char* name;
};

/** Kernels chosen for this process (CPU probe + ASCHWARZ_SIMD override). */
const Ops& ops();

/** Scalar reference kernels, always available. */
const Ops& scalar_ops();

/** AVX2 kernels, or nullptr when unsupported by the CPU. */
const Ops* avx2_ops();

}  // namespace aschwarz::kern
