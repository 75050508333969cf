#pragma once

// Dense certification of the convergence conditions on desk-scale instances:
// assemble M = sum_s R^(s)T W^(s) (A^(s))^-1 R^(s) and N = R~^T A~^-1 R~ as
// dense operators, evaluate the spectral-radius criteria, and search the
// damping grid.  Everything here is O(n^2..n^3) and guarded by a dense limit;
// the solvers never call into this module.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aschwarz/decomposition.hpp"
#include "aschwarz/dense.hpp"
#include "aschwarz/linalg.hpp"
#include "aschwarz/sparse.hpp"

namespace aschwarz {

struct OperatorBundle {
    DenseMatrix A;  // global matrix
    DenseMatrix M;  // sum_s R^(s)T W^(s) (A^(s))^-1 R^(s)
    DenseMatrix N;  // R~^T A~^-1 R~  (zero matrix when built without a coarse space)
    DenseMatrix ima;  // I - M A
    DenseMatrix ina;  // I - N A
    // (I - MA) R^(s)T W^(s) R^(s) (I - NA), one per subdomain; the middle
    // factor is the diagonal carrying subdomain s's partition-of-unity weights
    std::vector<DenseMatrix> terms;
};

// Assembles the bundle from the decomposition's weights and local blocks.
// `coarse` may be null: N = 0 and the terms degenerate to (I-MA) R^T W R.
// Throws std::invalid_argument when n exceeds dense_limit and
// std::runtime_error when a local block is singular.
OperatorBundle build_operator_bundle(const SparseMatrix& A, const Decomposition& dec,
                                     const CoarseSpace* coarse,
                                     std::size_t dense_limit = 4096);

// The restriction the M-matrix theorem hypothesizes: one row shared with each
// R^(s) — a coarse-point selection (the median owned unknown per subdomain),
// with A~ = R~ A R~^T the principal submatrix on those points.  For an
// M-matrix this makes I-NA entrywise nonnegative exactly.  The solver's own
// coarse operator aggregates full ownership blocks instead; that operator
// does not satisfy the row-sharing hypothesis and its I-NA has genuinely
// negative entries, so certificates of the theorem's conditions are issued
// against this selection operator.
CoarseSpace selection_coarse(const SparseMatrix& A, const Decomposition& dec);

struct CheckResult {
    double rho = 0.0;
    bool convergent = false;       // rho < 1 - tol
    bool power_converged = false;  // power iteration reached its tolerance
};

// rho(|I - MA|): the one-level condition.
CheckResult check_one_level(const OperatorBundle& bundle, double tol = 1e-8);

// rho(sum_s |(I-MA) R^(s)T W^(s) R^(s) (I-NA)|): the two-level condition for
// shared or replicated coarse data.
CheckResult check_shared_condition(const OperatorBundle& bundle, double tol = 1e-8);

// rho(|I - MA| |I - NA|): the simpler majorant of the shared condition.
CheckResult check_lemma_condition(const OperatorBundle& bundle, double tol = 1e-8);

// (I - MA)(I - NA); its spectral radius certifies the synchronous two-level
// iteration.
DenseMatrix sync_iteration_matrix(const OperatorBundle& bundle);

// {1, 0.9, ..., 0.1, 0.05, 0.01}
const std::vector<double>& default_theta_grid();

// Scans the grid descending from 1 and returns the first theta with
// rho(|I-MA| (I + theta |NA|)) < 1 - tol.  The bound is monotone in theta, so
// the admissible set is downward-closed and the first hit is the one needing
// the least damping.  Returns nullopt when rho(|I-MA|) >= 1 - tol (no theta
// can qualify) or when no grid value does.
std::optional<double> min_damping(const OperatorBundle& bundle,
                                  const std::vector<double>& grid = default_theta_grid(),
                                  double tol = 1e-8);

// Power iteration for a general (signed) matrix: 2-norm normalization,
// Rayleigh-quotient estimate, |estimate| reported.  Reliable when the
// dominant eigenvalue is real and simple — the case for the essentially
// nonnegative operators certified here; `converged` reports whether the
// estimate settled.
PowerResult spectral_radius_signed(const DenseMatrix& B, double tol = 1e-10,
                                   std::size_t max_iter = 10000);

// JSON certificate (stable key order): instance description, the condition
// checks, the synchronous radii, admissible theta, M-matrix status.
std::string certificate_json(const std::string& instance, const SparseMatrix& A,
                             const OperatorBundle& bundle, double tol = 1e-8);

}  // namespace aschwarz
