// AVX2 + FMA kernels.  This translation unit is compiled with -mavx2 -mfma;
// callers reach it only through the dispatch table after a runtime CPU check.

#include "aschwarz/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define ASCHWARZ_X86 1
#else
#define ASCHWARZ_X86 0
#endif

#if ASCHWARZ_X86
#include <immintrin.h>

#include <cmath>

namespace aschwarz::kern {
namespace {

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), y0);
        y1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i + 4), y1);
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        y0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), y0);
        _mm256_storeu_pd(y + i, y0);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(std::size_t n, double a, double* x) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double nrm2sq_avx2(std::size_t n, const double* x) { return dot_avx2(n, x, x); }

double max_abs_avx2(std::size_t n, const double* x) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d best = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        best = _mm256_max_pd(best, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
    __m128d lo = _mm256_castpd256_pd128(best);
    __m128d hi = _mm256_extractf128_pd(best, 1);
    lo = _mm_max_pd(lo, hi);
    double out = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > out) out = v;
    }
    return out;
}

void axpby_avx2(std::size_t n, double a, const double* x, double b, double* y) {
    __m256d av = _mm256_set1_pd(a);
    __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                    _mm256_mul_pd(bv, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

// C += alpha * A * B, i-k-j order with 2x k unrolling: the inner loop streams
// rows of B into a row of C with FMA.
void gemm_acc_avx2(std::size_t m, std::size_t n, std::size_t k, double alpha,
                   const double* A, std::size_t lda,
                   const double* B, std::size_t ldb,
                   double* C, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = A + i * lda;
        double* c_row = C + i * ldc;
        std::size_t kk = 0;
        for (; kk + 2 <= k; kk += 2) {
            __m256d a0 = _mm256_set1_pd(alpha * a_row[kk]);
            __m256d a1 = _mm256_set1_pd(alpha * a_row[kk + 1]);
            const double* b0 = B + kk * ldb;
            const double* b1 = B + (kk + 1) * ldb;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d c = _mm256_loadu_pd(c_row + j);
                c = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), c);
                c = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + j), c);
                _mm256_storeu_pd(c_row + j, c);
            }
            for (; j < n; ++j)
                c_row[j] += alpha * a_row[kk] * b0[j] + alpha * a_row[kk + 1] * b1[j];
        }
        for (; kk < k; ++kk) {
            __m256d a0 = _mm256_set1_pd(alpha * a_row[kk]);
            const double* b0 = B + kk * ldb;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d c = _mm256_loadu_pd(c_row + j);
                c = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), c);
                _mm256_storeu_pd(c_row + j, c);
            }
            for (; j < n; ++j) c_row[j] += alpha * a_row[kk] * b0[j];
        }
    }
}

void gemv_avx2(std::size_t m, std::size_t n, const double* A, std::size_t lda,
               const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) y[i] = dot_avx2(n, A + i * lda, x);
}

}  // namespace

const Ops* avx2_ops() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
        return nullptr;
    static const Ops table{
        axpy_avx2,  scal_avx2,   dot_avx2,     nrm2sq_avx2,
        max_abs_avx2, axpby_avx2, gemm_acc_avx2, gemv_avx2,
        "avx2",
    };
    return &table;
}

}  // namespace aschwarz::kern

#else  // !ASCHWARZ_X86

namespace aschwarz::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace aschwarz::kern

#endif
