// Scalar reference kernels.  These define the semantics the SIMD variants are
// tested against; keep them simple and obviously correct.

#include "aschwarz/kernels.hpp"

#include <cmath>

namespace aschwarz::kern {
namespace {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double nrm2sq_scalar(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double max_abs_scalar(std::size_t n, const double* x) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > best) best = v;
    }
    return best;
}

void axpby_scalar(std::size_t n, double a, const double* x, double b, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

// Row-major C += alpha * A * B in i-k-j order: the inner loop is a saxpy over
// a row of B accumulated into a row of C, which vectorizes well and keeps the
// per-entry accumulation order (ascending k) identical across variants.
void gemm_acc_scalar(std::size_t m, std::size_t n, std::size_t k, double alpha,
                     const double* A, std::size_t lda,
                     const double* B, std::size_t ldb,
                     double* C, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = A + i * lda;
        double* c_row = C + i * ldc;
        for (std::size_t kk = 0; kk < k; ++kk) {
            double a = alpha * a_row[kk];
            const double* b_row = B + kk * ldb;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
        }
    }
}

void gemv_scalar(std::size_t m, std::size_t n, const double* A, std::size_t lda,
                 const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = A + i * lda;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a_row[j] * x[j];
        y[i] = acc;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{
        axpy_scalar,  scal_scalar,     dot_scalar,  nrm2sq_scalar,
        max_abs_scalar, axpby_scalar,  gemm_acc_scalar, gemv_scalar,
        "scalar",
    };
    return table;
}

}  // namespace aschwarz::kern
