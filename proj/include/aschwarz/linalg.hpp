#pragma once

// Numerical routines shared by the solvers and the convergence analysis:
// power iteration for nonnegative matrices, weighted maximum norm, M-matrix
// test, and conjugate gradients.

#include <cstddef>

#include "aschwarz/dense.hpp"
#include "aschwarz/sparse.hpp"

namespace aschwarz {

struct PowerResult {
    double rho = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Power iteration for an entrywise-nonnegative matrix, started from the
// all-ones vector; converged when successive Rayleigh-quotient estimates
// differ by at most tol.  A negative entry is a contract violation (throws).
PowerResult spectral_radius_nonneg(const DenseMatrix& B, double tol = 1e-10,
                                   std::size_t max_iter = 10000);

// max_i (1/w_i) sum_j |a_ij| w_j, w entrywise positive.
double weighted_max_norm(const DenseMatrix& A, const Vector& w);

enum class MMatrixResult { yes, no, unknown };

// no if any off-diagonal stored entry is positive; yes if strictly or
// irreducibly diagonally dominant with positive diagonal; otherwise a dense
// inverse decides for nrows <= n_dense_limit (entrywise >= -1e-12 * |A^-1|_inf),
// with singular A -> no; larger matrices -> unknown.
MMatrixResult is_m_matrix(const SparseMatrix& A, std::size_t n_dense_limit = 4096);

struct CgResult {
    Vector x;
    std::size_t iterations = 0;
    bool converged = false;
};

// Plain CG from x0 = 0 on an SPD matrix; stops at |b - Ax|_2 <= tol * |b|_2.
// Throws on a nonpositive-curvature direction (matrix not SPD).
CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol,
                  std::size_t max_iter);

}  // namespace aschwarz
