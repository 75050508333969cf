#include "aschwarz/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aschwarz/kernels.hpp"

namespace aschwarz {

PowerResult spectral_radius_nonneg(const DenseMatrix& B, double tol, std::size_t max_iter) {
    if (B.rows() != B.cols())
        throw std::invalid_argument("spectral_radius_nonneg: matrix not square");
    const std::size_t n = B.rows();
    for (std::size_t i = 0; i < n * n; ++i)
        if (B.data()[i] < 0.0)
            throw std::invalid_argument("spectral_radius_nonneg: negative entry");

    PowerResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    Vector v(n, 1.0);
    Vector w(n, 0.0);
    const auto& k = kern::ops();
    double prev = -1.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        gemv(B, v.data(), w.data());
        const double vv = k.nrm2sq(n, v.data());
        const double est = k.dot(n, v.data(), w.data()) / vv;  // Rayleigh quotient
        res.rho = est;
        res.iterations = it;
        if (it > 1 && std::fabs(est - prev) <= tol) {
            res.converged = true;
            return res;
        }
        prev = est;
        const double wn = std::sqrt(k.nrm2sq(n, w.data()));
        if (wn == 0.0) {  // B v = 0: the iterate is annihilated, rho estimate is 0
            res.rho = 0.0;
            res.converged = true;
            return res;
        }
        k.scal(n, 1.0 / wn, w.data());
        std::swap(v, w);
    }
    return res;  // converged = false, best estimate retained
}

double weighted_max_norm(const DenseMatrix& A, const Vector& w) {
    if (A.rows() != A.cols() || A.rows() != w.size())
        throw std::invalid_argument("weighted_max_norm: dimension mismatch");
    for (double wi : w)
        if (!(wi > 0.0)) throw std::invalid_argument("weighted_max_norm: nonpositive weight");
    double best = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double s = 0.0;
        const double* row = A.row(i);
        for (std::size_t j = 0; j < A.cols(); ++j) s += std::fabs(row[j]) * w[j];
        best = std::max(best, s / w[i]);
    }
    return best;
}

namespace {

// Reachability of every node from node 0 over the given CSR pattern.
bool all_reachable(const std::vector<std::size_t>& row_ptr, const std::vector<int>& col,
                   std::size_t n) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t k = row_ptr[u]; k < row_ptr[u + 1]; ++k) {
            auto v = static_cast<std::size_t>(col[k]);
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == n;
}

bool is_irreducible(const SparseMatrix& A) {
    const std::size_t n = A.nrows;
    if (n <= 1) return true;
    // Strong connectivity: 0 reaches everyone in A's pattern and in the
    // transposed pattern.
    if (!all_reachable(A.row_ptr, A.col, n)) return false;
    // transpose pattern
    std::vector<std::size_t> rp(n + 1, 0);
    for (int j : A.col) ++rp[static_cast<std::size_t>(j) + 1];
    for (std::size_t i = 0; i < n; ++i) rp[i + 1] += rp[i];
    std::vector<int> tc(A.col.size());
    std::vector<std::size_t> fill = rp;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            tc[fill[static_cast<std::size_t>(A.col[k])]++] = static_cast<int>(i);
    return all_reachable(rp, tc, n);
}

}  // namespace

MMatrixResult is_m_matrix(const SparseMatrix& A, std::size_t n_dense_limit) {
    if (A.nrows != A.ncols) throw std::invalid_argument("is_m_matrix: matrix not square");
    const std::size_t n = A.nrows;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (static_cast<std::size_t>(A.col[k]) != i && A.val[k] > 0.0)
                return MMatrixResult::no;

    // Diagonal dominance (sufficient condition): strict everywhere, or weak
    // everywhere with at least one strict row and an irreducible pattern.
    bool diag_positive = true;
    bool weak_everywhere = true;
    bool strict_everywhere = true;
    bool any_strict = false;
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 0.0;
        double off = 0.0;
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            if (static_cast<std::size_t>(A.col[k]) == i)
                diag += A.val[k];
            else
                off += std::fabs(A.val[k]);
        }
        if (!(diag > 0.0)) diag_positive = false;
        if (diag < off) weak_everywhere = false;
        if (diag <= off)
            strict_everywhere = false;
        else
            any_strict = true;
    }
    if (diag_positive &&
        (strict_everywhere || (weak_everywhere && any_strict && is_irreducible(A))))
        return MMatrixResult::yes;

    if (n <= n_dense_limit) {
        DenseMatrix inv;
        try {
            inv = dense_inverse(to_dense(A));
        } catch (const std::runtime_error&) {
            return MMatrixResult::no;  // singular
        }
        double inf_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += std::fabs(inv(i, j));
            inf_norm = std::max(inf_norm, s);
        }
        const double tol_inv = 1e-12 * inf_norm;
        for (std::size_t i = 0; i < n * n; ++i)
            if (inv.data()[i] < -tol_inv) return MMatrixResult::no;
        return MMatrixResult::yes;
    }
    return MMatrixResult::unknown;
}

CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol, std::size_t max_iter) {
    if (A.nrows != A.ncols || b.size() != A.nrows)
        throw std::invalid_argument("cg_solve: dimension mismatch");
    const std::size_t n = A.nrows;
    const auto& k = kern::ops();

    CgResult res;
    res.x.assign(n, 0.0);
    const double bnorm = std::sqrt(k.nrm2sq(n, b.data()));
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    const double target = tol * bnorm;

    Vector r = b;  // r = b - A*0
    Vector p = r;
    Vector Ap(n);
    double rr = k.nrm2sq(n, r.data());
    for (std::size_t it = 1; it <= max_iter; ++it) {
        spmv(A, p.data(), Ap.data());
        const double pAp = k.dot(n, p.data(), Ap.data());
        if (!(pAp > 0.0)) throw std::runtime_error("cg_solve: nonpositive curvature (matrix not SPD)");
        const double alpha = rr / pAp;
        k.axpy(n, alpha, p.data(), res.x.data());
        k.axpy(n, -alpha, Ap.data(), r.data());
        double rr_new = k.nrm2sq(n, r.data());
        res.iterations = it;
        if (std::sqrt(rr_new) <= target) {
            // Recursive residual converged; confirm against the true residual
            // and restart if rounding drift left it above target.
            spmv(A, res.x.data(), Ap.data());
            r = b;
            k.axpy(n, -1.0, Ap.data(), r.data());
            rr_new = k.nrm2sq(n, r.data());
            if (std::sqrt(rr_new) <= target) {
                res.converged = true;
                return res;
            }
            p = r;
            rr = rr_new;
            continue;
        }
        k.axpby(n, 1.0, r.data(), rr_new / rr, p.data());
        rr = rr_new;
    }
    return res;  // max_iter reached, converged = false
}

}  // namespace aschwarz
