#pragma once

// Reference synchronous solvers: one-level Schwarz iteration, two-level with
// multiplicative coarse correction (replicated or centralized layouts produce
// identical synchronous sequences), and the additive-correction variant.

#include "aschwarz/workspace.hpp"

namespace aschwarz {

struct SolveResult {
    Vector x;  // weighted global assembly of the final copies
    RunReport report;
};

// Runs the scheme selected in ctx.cfg.scheme.  A and b are the global system
// the context was built from (used for the recomputed final residual).
SolveResult solve_sync(const SchwarzContext& ctx, const SparseMatrix& A, const Vector& b);

// Convenience wrappers matching the module-level operations.
SolveResult solve_one_level(const SparseMatrix& A, const Vector& b,
                            const Decomposition& d, const SolverConfig& cfg);
SolveResult solve_two_level_sync(const SparseMatrix& A, const Vector& b,
                                 const Decomposition& d, const CoarseSpace& coarse,
                                 const SolverConfig& cfg);

}  // namespace aschwarz
