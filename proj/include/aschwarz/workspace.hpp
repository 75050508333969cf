#pragma once

// Per-subdomain immutable setup shared by the synchronous solvers and both
// asynchronous engines: restricted operators, dependency (interface) index
// sets, local and coarse factorizations, and the deterministic update
// primitives built on them.  Keeping one implementation of these primitives
// is what makes the zero-delay simulator run bit-identical to the
// synchronous solver.

#include <cstddef>
#include <optional>
#include <vector>

#include "aschwarz/config.hpp"
#include "aschwarz/decomposition.hpp"
#include "aschwarz/dense.hpp"
#include "aschwarz/sparse.hpp"

namespace aschwarz {

// One neighbor relation of subdomain s.  The receive half describes the
// values s needs from `peer` (x^(peer)_j for j in its dependency set, sorted
// by global index); the send half lists the positions in s's own vector that
// `peer` needs.  Either half may be empty.
struct NeighborLink {
    int peer = -1;
    int ordinal_at_peer = -1;  // index of s in peer's link list
    std::vector<int> recv_ext_pos;    // position of j in ext
    std::vector<double> recv_weight;  // w^(peer)_j
    std::vector<int> recv_coarse;     // owner(j), for interface-data correction
    std::vector<int> send_pos;        // positions in omega of values peer needs
};

struct SubdomainWorkspace {
    int s = -1;
    std::vector<int> omega;            // Omega^(s), sorted global indices
    std::vector<double> w;             // diag of W^(s), aligned with omega
    std::vector<int> ext;              // Omega^(s) plus halo columns, sorted
    std::vector<int> omega_ext_pos;    // position of omega[l] in ext
    std::vector<int> coarse_of_omega;  // owner(omega[l])
    SparseMatrix A_rows_ext;           // rows Omega^(s) x cols ext (local cols)
    SparseMatrix A_loc;                // A^(s), principal submatrix on Omega^(s)
    Vector b_loc;
    std::vector<NeighborLink> links;   // ascending peer id

    // local solver (configured once)
    bool local_lu = true;
    double cg_tol = 1e-10;
    std::size_t cg_max_iter = 200000;
    LuFactors lu;  // valid when local_lu
};

struct SchwarzContext {
    Decomposition dec;
    std::size_t n = 0;
    SolverConfig cfg;
    std::vector<SubdomainWorkspace> ws;

    bool two_level = false;
    SparseMatrix R_tilde;
    SparseMatrix A_tilde;        // sparse, for CG coarse solves and oracles
    bool coarse_lu = true;
    LuFactors A_tilde_lu;        // valid when coarse_lu
};

// Builds all workspaces.  `coarse` may be null for one-level schemes; it is
// required for two-level schemes.
SchwarzContext build_context(const SparseMatrix& A, const Vector& b,
                             const Decomposition& d, const CoarseSpace* coarse,
                             const SolverConfig& cfg);

// Interface buffers for one subdomain: bufs[i] holds the received values of
// links[i], aligned with recv_ext_pos.  Zero-initialized (the global initial
// guess is zero, so zero buffers are a consistent start).
std::vector<Vector> make_link_buffers(const SubdomainWorkspace& ws);

// xasm over ext: own weighted copy first, then each link's weighted buffer in
// link order.  Deterministic accumulation order.
void assemble_interior(const SubdomainWorkspace& ws, const Vector& x_loc,
                       const std::vector<Vector>& bufs, Vector& xasm);

// resid = b_loc - A_rows_ext * xasm (per-row left-to-right sums).
void local_residual(const SubdomainWorkspace& ws, const Vector& xasm, Vector& resid);

// M^(s) rhs via the configured local solver (LU or CG on A^(s)).
Vector apply_local_solver(const SubdomainWorkspace& ws, const Vector& rhs);

// tau_tilde += R_tilde R^(s)^T W^(s) resid (p-vector, aggregated by owner).
void accumulate_coarse_contribution(const SubdomainWorkspace& ws, const Vector& resid,
                                    Vector& tau_tilde);

// resid^T W^(s) resid.
double weighted_norm_contribution(const SubdomainWorkspace& ws, const Vector& resid);

// Solve A_tilde x_tilde = rhs with the configured coarse solver.
Vector solve_coarse(const SchwarzContext& ctx, const Vector& rhs);

// x_loc[l] += theta * x_tilde[owner(omega[l])] for every l.
void apply_coarse_correction(const SubdomainWorkspace& ws, const Vector& x_tilde,
                             double theta, Vector& x_loc);

// The "correction of interface data": buffered neighbor values get the same
// coarse correction their owners applied.
void apply_coarse_correction_to_buffers(const SubdomainWorkspace& ws, const Vector& x_tilde,
                                        double theta, std::vector<Vector>& bufs);

// Weighted global assembly x_g = sum_s w^(s)_g x^(s)_g, ascending s.
Vector assemble_global(const SchwarzContext& ctx, const std::vector<Vector>& x_locs);

// |b - Ax|_2 recomputed from scratch (authoritative final residual).
double global_residual_norm(const SparseMatrix& A, const Vector& b, const Vector& x);

// f^(s): x^(s) + M^(s)(b^(s) - sum_r R^(s) A R^(r)^T W^(r) x^(r)), reading the
// current copies of every subdomain.  Reference entry point for tests; the
// engines inline the same primitives against their own buffers.
Vector local_update_f(const SchwarzContext& ctx, std::size_t s,
                      const std::vector<Vector>& x_all);

}  // namespace aschwarz
