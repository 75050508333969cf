#include "aschwarz/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aschwarz/kernels.hpp"
#include "aschwarz/linalg.hpp"

namespace aschwarz {

void SolverConfig::validate() const {
    if (theta < 0.0) throw std::invalid_argument("config: theta must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
    if (zeta < 1) throw std::invalid_argument("config: zeta must be >= 1");
    if (k_max < 1) throw std::invalid_argument("config: k_max must be >= 1");
    if (local_solver.kind == InnerSolver::Kind::cg && !(local_solver.cg_tol > 0.0))
        throw std::invalid_argument("config: local cg tolerance must be > 0");
    if (coarse_solver.kind == InnerSolver::Kind::cg && !(coarse_solver.cg_tol > 0.0))
        throw std::invalid_argument("config: coarse cg tolerance must be > 0");
}

SchwarzContext build_context(const SparseMatrix& A, const Vector& b,
                             const Decomposition& d, const CoarseSpace* coarse,
                             const SolverConfig& cfg) {
    cfg.validate();
    if (A.nrows != A.ncols || A.nrows != d.global_n || b.size() != d.global_n)
        throw std::invalid_argument("build_context: dimension mismatch");
    const bool needs_coarse = cfg.scheme != Scheme::one_level;
    if (needs_coarse && coarse == nullptr)
        throw std::invalid_argument("build_context: two-level scheme requires a coarse space");

    SchwarzContext ctx;
    ctx.dec = d;
    ctx.n = d.global_n;
    ctx.cfg = cfg;
    ctx.ws.resize(d.p);

    // Pass 1: per-subdomain index structure and restricted operators.
    for (std::size_t s = 0; s < d.p; ++s) {
        SubdomainWorkspace& ws = ctx.ws[s];
        ws.s = static_cast<int>(s);
        ws.omega = d.subdomain_indices[s];
        ws.w = d.weights[s];

        // ext = omega plus every column coupled to a row of omega
        std::vector<int> ext = ws.omega;
        for (int g : ws.omega) {
            auto gi = static_cast<std::size_t>(g);
            for (std::size_t k = A.row_ptr[gi]; k < A.row_ptr[gi + 1]; ++k)
                ext.push_back(A.col[k]);
        }
        std::sort(ext.begin(), ext.end());
        ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
        ws.ext = std::move(ext);

        std::vector<int> glob2ext(d.global_n, -1);
        for (std::size_t e = 0; e < ws.ext.size(); ++e)
            glob2ext[static_cast<std::size_t>(ws.ext[e])] = static_cast<int>(e);

        ws.omega_ext_pos.resize(ws.omega.size());
        ws.coarse_of_omega.resize(ws.omega.size());
        for (std::size_t l = 0; l < ws.omega.size(); ++l) {
            ws.omega_ext_pos[l] = glob2ext[static_cast<std::size_t>(ws.omega[l])];
            ws.coarse_of_omega[l] = d.owner[static_cast<std::size_t>(ws.omega[l])];
        }

        SparseBuilder rb(ws.omega.size(), ws.ext.size());
        for (std::size_t l = 0; l < ws.omega.size(); ++l) {
            auto gi = static_cast<std::size_t>(ws.omega[l]);
            for (std::size_t k = A.row_ptr[gi]; k < A.row_ptr[gi + 1]; ++k)
                rb.add(l, glob2ext[static_cast<std::size_t>(A.col[k])], A.val[k]);
        }
        ws.A_rows_ext = rb.finalize();
        ws.A_loc = restrict_sparse(A, ws.omega);

        ws.b_loc.resize(ws.omega.size());
        for (std::size_t l = 0; l < ws.omega.size(); ++l)
            ws.b_loc[l] = b[static_cast<std::size_t>(ws.omega[l])];

        ws.local_lu = cfg.local_solver.kind == InnerSolver::Kind::lu;
        ws.cg_tol = cfg.local_solver.cg_tol;
        ws.cg_max_iter = cfg.local_solver.cg_max_iter;
        if (ws.local_lu) {
            ws.lu = lu_factor(to_dense(ws.A_loc));
            if (ws.lu.singular)
                throw std::runtime_error("build_context: singular local block A^(s)");
        }
    }

    // Pass 2: dependency sets.  dep(s <- r) = { j in ext(s) ∩ omega(r),
    // w^(r)_j != 0 }, sorted by global index; r's matching send list uses the
    // same order, so buffers align by construction.
    {
        // sharers[j]: (subdomain r, position of j in omega(r)) pairs, ascending r
        struct Sharer {
            int r;
            int pos;
        };
        std::vector<std::vector<Sharer>> sharers(d.global_n);
        for (std::size_t r = 0; r < d.p; ++r)
            for (std::size_t l = 0; l < d.subdomain_indices[r].size(); ++l)
                sharers[static_cast<std::size_t>(d.subdomain_indices[r][l])].push_back(
                    {static_cast<int>(r), static_cast<int>(l)});

        // dep[s][r]: (global j, position of j in omega(r)) lists
        struct DepEntry {
            int j;
            int pos_in_r;
        };
        std::vector<std::vector<std::vector<DepEntry>>> dep(
            d.p, std::vector<std::vector<DepEntry>>(d.p));
        for (std::size_t s = 0; s < d.p; ++s)
            for (int j : ctx.ws[s].ext)  // ext sorted -> dep lists sorted by j
                for (const Sharer& sh : sharers[static_cast<std::size_t>(j)]) {
                    if (sh.r == static_cast<int>(s)) continue;
                    if (d.weights[static_cast<std::size_t>(sh.r)]
                                 [static_cast<std::size_t>(sh.pos)] != 0.0)
                        dep[s][static_cast<std::size_t>(sh.r)].push_back({j, sh.pos});
                }

        for (std::size_t s = 0; s < d.p; ++s) {
            SubdomainWorkspace& ws = ctx.ws[s];
            std::vector<int> glob2ext(d.global_n, -1);
            for (std::size_t e = 0; e < ws.ext.size(); ++e)
                glob2ext[static_cast<std::size_t>(ws.ext[e])] = static_cast<int>(e);
            for (std::size_t r = 0; r < d.p; ++r) {
                if (r == s) continue;
                if (dep[s][r].empty() && dep[r][s].empty()) continue;
                NeighborLink link;
                link.peer = static_cast<int>(r);
                for (const DepEntry& e : dep[s][r]) {
                    link.recv_ext_pos.push_back(glob2ext[static_cast<std::size_t>(e.j)]);
                    link.recv_weight.push_back(
                        d.weights[r][static_cast<std::size_t>(e.pos_in_r)]);
                    link.recv_coarse.push_back(d.owner[static_cast<std::size_t>(e.j)]);
                }
                // dep[r][s] entries carry the position in omega(s): exactly
                // the values s must send to r, in the shared (by-j) order.
                for (const DepEntry& e : dep[r][s]) link.send_pos.push_back(e.pos_in_r);
                ws.links.push_back(std::move(link));
            }
        }
        // reverse ordinals
        for (std::size_t s = 0; s < d.p; ++s)
            for (auto& link : ctx.ws[s].links) {
                const auto& peer_links = ctx.ws[static_cast<std::size_t>(link.peer)].links;
                for (std::size_t o = 0; o < peer_links.size(); ++o)
                    if (peer_links[o].peer == static_cast<int>(s)) {
                        link.ordinal_at_peer = static_cast<int>(o);
                        break;
                    }
            }
    }

    if (needs_coarse) {
        ctx.two_level = true;
        ctx.R_tilde = coarse->R_tilde;
        ctx.A_tilde = coarse->A_tilde;
        ctx.coarse_lu = cfg.coarse_solver.kind == InnerSolver::Kind::lu;
        if (ctx.coarse_lu) {
            ctx.A_tilde_lu = lu_factor(to_dense(ctx.A_tilde));
            if (ctx.A_tilde_lu.singular)
                throw std::runtime_error("build_context: singular coarse matrix A_tilde");
        }
    }
    return ctx;
}

std::vector<Vector> make_link_buffers(const SubdomainWorkspace& ws) {
    std::vector<Vector> bufs;
    bufs.reserve(ws.links.size());
    for (const auto& link : ws.links) bufs.emplace_back(link.recv_ext_pos.size(), 0.0);
    return bufs;
}

void assemble_interior(const SubdomainWorkspace& ws, const Vector& x_loc,
                       const std::vector<Vector>& bufs, Vector& xasm) {
    xasm.assign(ws.ext.size(), 0.0);
    for (std::size_t l = 0; l < ws.omega.size(); ++l)
        xasm[static_cast<std::size_t>(ws.omega_ext_pos[l])] += ws.w[l] * x_loc[l];
    for (std::size_t li = 0; li < ws.links.size(); ++li) {
        const auto& link = ws.links[li];
        const Vector& buf = bufs[li];
        for (std::size_t i = 0; i < link.recv_ext_pos.size(); ++i)
            xasm[static_cast<std::size_t>(link.recv_ext_pos[i])] +=
                link.recv_weight[i] * buf[i];
    }
}

void local_residual(const SubdomainWorkspace& ws, const Vector& xasm, Vector& resid) {
    resid.resize(ws.omega.size());
    spmv(ws.A_rows_ext, xasm.data(), resid.data());
    const std::size_t m = ws.omega.size();
    for (std::size_t l = 0; l < m; ++l) resid[l] = ws.b_loc[l] - resid[l];
}

Vector apply_local_solver(const SubdomainWorkspace& ws, const Vector& rhs) {
    if (ws.local_lu) return lu_solve(ws.lu, rhs);
    CgResult r = cg_solve(ws.A_loc, rhs, ws.cg_tol, ws.cg_max_iter);
    if (!r.converged)
        throw std::runtime_error("apply_local_solver: local CG did not converge");
    return std::move(r.x);
}

void accumulate_coarse_contribution(const SubdomainWorkspace& ws, const Vector& resid,
                                    Vector& tau_tilde) {
    for (std::size_t l = 0; l < ws.omega.size(); ++l)
        tau_tilde[static_cast<std::size_t>(ws.coarse_of_omega[l])] += ws.w[l] * resid[l];
}

double weighted_norm_contribution(const SubdomainWorkspace& ws, const Vector& resid) {
    double s = 0.0;
    for (std::size_t l = 0; l < ws.omega.size(); ++l) s += ws.w[l] * resid[l] * resid[l];
    return s;
}

Vector solve_coarse(const SchwarzContext& ctx, const Vector& rhs) {
    if (!ctx.two_level) throw std::logic_error("solve_coarse: no coarse space configured");
    if (ctx.coarse_lu) return lu_solve(ctx.A_tilde_lu, rhs);
    CgResult r = cg_solve(ctx.A_tilde, rhs, ctx.cfg.coarse_solver.cg_tol,
                          ctx.cfg.coarse_solver.cg_max_iter);
    if (!r.converged) throw std::runtime_error("solve_coarse: coarse CG did not converge");
    return std::move(r.x);
}

void apply_coarse_correction(const SubdomainWorkspace& ws, const Vector& x_tilde,
                             double theta, Vector& x_loc) {
    for (std::size_t l = 0; l < ws.omega.size(); ++l)
        x_loc[l] += theta * x_tilde[static_cast<std::size_t>(ws.coarse_of_omega[l])];
}

void apply_coarse_correction_to_buffers(const SubdomainWorkspace& ws, const Vector& x_tilde,
                                        double theta, std::vector<Vector>& bufs) {
    for (std::size_t li = 0; li < ws.links.size(); ++li) {
        const auto& link = ws.links[li];
        for (std::size_t i = 0; i < link.recv_coarse.size(); ++i)
            bufs[li][i] += theta * x_tilde[static_cast<std::size_t>(link.recv_coarse[i])];
    }
}

Vector assemble_global(const SchwarzContext& ctx, const std::vector<Vector>& x_locs) {
    Vector x(ctx.n, 0.0);
    for (std::size_t s = 0; s < ctx.ws.size(); ++s) {
        const auto& ws = ctx.ws[s];
        for (std::size_t l = 0; l < ws.omega.size(); ++l)
            x[static_cast<std::size_t>(ws.omega[l])] += ws.w[l] * x_locs[s][l];
    }
    return x;
}

double global_residual_norm(const SparseMatrix& A, const Vector& b, const Vector& x) {
    Vector Ax = spmv(A, x);
    const auto& k = kern::ops();
    for (std::size_t i = 0; i < b.size(); ++i) Ax[i] = b[i] - Ax[i];
    return std::sqrt(k.nrm2sq(Ax.size(), Ax.data()));
}

Vector local_update_f(const SchwarzContext& ctx, std::size_t s,
                      const std::vector<Vector>& x_all) {
    const SubdomainWorkspace& ws = ctx.ws[s];
    std::vector<Vector> bufs = make_link_buffers(ws);
    for (std::size_t li = 0; li < ws.links.size(); ++li) {
        const auto& link = ws.links[li];
        const auto& peer_ws = ctx.ws[static_cast<std::size_t>(link.peer)];
        const auto& peer_send =
            peer_ws.links[static_cast<std::size_t>(link.ordinal_at_peer)].send_pos;
        for (std::size_t i = 0; i < peer_send.size(); ++i)
            bufs[li][i] = x_all[static_cast<std::size_t>(link.peer)]
                               [static_cast<std::size_t>(peer_send[i])];
    }
    Vector xasm, resid;
    assemble_interior(ws, x_all[s], bufs, xasm);
    local_residual(ws, xasm, resid);
    Vector v = apply_local_solver(ws, resid);
    Vector out = x_all[s];
    kern::ops().axpy(out.size(), 1.0, v.data(), out.data());
    return out;
}

}  // namespace aschwarz
