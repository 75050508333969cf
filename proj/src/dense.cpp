#include "aschwarz/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aschwarz/kernels.hpp"

namespace aschwarz {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

void gemm_acc(double alpha, const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C) {
    if (A.cols() != B.rows() || C.rows() != A.rows() || C.cols() != B.cols())
        throw std::invalid_argument("gemm_acc: dimension mismatch");
    kern::ops().gemm_acc(A.rows(), B.cols(), A.cols(), alpha, A.data(), A.cols(),
                         B.data(), B.cols(), C.data(), C.cols());
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    DenseMatrix C(A.rows(), B.cols(), 0.0);
    gemm_acc(1.0, A, B, C);
    return C;
}

void gemv(const DenseMatrix& A, const double* x, double* y) {
    kern::ops().gemv(A.rows(), A.cols(), A.data(), A.cols(), x, y);
}

DenseMatrix abs_matrix(const DenseMatrix& B) {
    DenseMatrix R(B.rows(), B.cols());
    const double* src = B.data();
    double* dst = R.data();
    for (std::size_t i = 0, n = B.rows() * B.cols(); i < n; ++i) dst[i] = std::fabs(src[i]);
    return R;
}

DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("subtract: dimension mismatch");
    DenseMatrix R(A.rows(), A.cols());
    const double* a = A.data();
    const double* b = B.data();
    double* r = R.data();
    for (std::size_t i = 0, n = A.rows() * A.cols(); i < n; ++i) r[i] = a[i] - b[i];
    return R;
}

namespace {

// Unblocked panel factorization of the m x nb panel starting at (k0, k0) in
// the full matrix; pivot rows are swapped across the entire matrix.
void factor_panel(DenseMatrix& A, std::vector<int>& piv, std::size_t k0,
                  std::size_t nb, double tiny, bool& singular) {
    const std::size_t n = A.rows();
    for (std::size_t k = k0; k < k0 + nb; ++k) {
        std::size_t p = k;
        double best = std::fabs(A(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::fabs(A(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        piv[k] = static_cast<int>(p);
        if (p != k)
            for (std::size_t j = 0; j < A.cols(); ++j) std::swap(A(k, j), A(p, j));
        if (best <= tiny) {
            singular = true;
            continue;  // leave the column; solve will refuse
        }
        const double inv = 1.0 / A(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            A(i, k) *= inv;
            const double lik = A(i, k);
            if (lik != 0.0)
                kern::ops().axpy(k0 + nb - (k + 1), -lik, A.row(k) + k + 1, A.row(i) + k + 1);
        }
    }
}

}  // namespace

LuFactors lu_factor(const DenseMatrix& Ain) {
    if (Ain.rows() != Ain.cols()) throw std::invalid_argument("lu_factor: matrix not square");
    LuFactors f;
    f.lu = Ain;
    const std::size_t n = f.lu.rows();
    f.piv.assign(n, 0);
    if (n == 0) return f;

    DenseMatrix& A = f.lu;
    double amax = kern::ops().max_abs(n * n, A.data());
    const double tiny = 100.0 * std::numeric_limits<double>::epsilon() * std::max(amax, 1.0);

    const std::size_t nb = 48;
    for (std::size_t k0 = 0; k0 < n; k0 += nb) {
        const std::size_t nbk = std::min(nb, n - k0);
        factor_panel(A, f.piv, k0, nbk, tiny, f.singular);
        const std::size_t rest = n - (k0 + nbk);
        if (rest == 0) continue;

        // U12 = L11^{-1} A12 (unit lower triangular solve on the panel rows)
        for (std::size_t k = k0 + 1; k < k0 + nbk; ++k)
            for (std::size_t r = k0; r < k; ++r) {
                const double l = A(k, r);
                if (l != 0.0) kern::ops().axpy(rest, -l, A.row(r) + k0 + nbk, A.row(k) + k0 + nbk);
            }

        // A22 -= L21 * U12
        kern::ops().gemm_acc(rest, rest, nbk, -1.0, A.row(k0 + nbk) + k0, A.cols(),
                             A.row(k0) + k0 + nbk, A.cols(), A.row(k0 + nbk) + k0 + nbk,
                             A.cols());
    }
    return f;
}

void lu_solve_inplace(const LuFactors& f, double* x) {
    if (f.singular) throw std::runtime_error("lu_solve: singular factorization");
    const std::size_t n = f.lu.rows();
    const DenseMatrix& A = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t p = static_cast<std::size_t>(f.piv[k]);
        if (p != k) std::swap(x[k], x[p]);
    }
    // forward substitution (unit lower)
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        const double* row = A.row(i);
        for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
        x[i] = s;
    }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        const double* row = A.row(ii);
        for (std::size_t j = ii + 1; j < n; ++j) s -= row[j] * x[j];
        x[ii] = s / row[ii];
    }
}

std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b) {
    if (b.size() != f.lu.rows()) throw std::invalid_argument("lu_solve: rhs size mismatch");
    std::vector<double> x = b;
    lu_solve_inplace(f, x.data());
    return x;
}

DenseMatrix dense_inverse(const DenseMatrix& A) {
    const std::size_t n = A.rows();
    LuFactors f = lu_factor(A);
    if (f.singular) throw std::runtime_error("dense_inverse: singular matrix");
    DenseMatrix inv(n, n, 0.0);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        lu_solve_inplace(f, col.data());
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

}  // namespace aschwarz
