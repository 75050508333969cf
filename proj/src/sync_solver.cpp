#include "aschwarz/sync_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aschwarz/kernels.hpp"

namespace aschwarz {

namespace {

// Deliver every process's current interface values into its neighbors'
// buffers (the synchronous exchange).  Buffers are only written here, so the
// order of delivery does not matter.
void exchange_all(const SchwarzContext& ctx, const std::vector<Vector>& x,
                  std::vector<std::vector<Vector>>& bufs) {
    for (std::size_t s = 0; s < ctx.ws.size(); ++s) {
        const auto& ws = ctx.ws[s];
        for (const auto& link : ws.links) {
            if (link.send_pos.empty()) continue;
            Vector& dst = bufs[static_cast<std::size_t>(link.peer)]
                              [static_cast<std::size_t>(link.ordinal_at_peer)];
            for (std::size_t i = 0; i < link.send_pos.size(); ++i)
                dst[i] = x[s][static_cast<std::size_t>(link.send_pos[i])];
        }
    }
}

}  // namespace

SolveResult solve_sync(const SchwarzContext& ctx, const SparseMatrix& A, const Vector& b) {
    const std::size_t p = ctx.ws.size();
    const SolverConfig& cfg = ctx.cfg;
    const bool two_level = cfg.scheme != Scheme::one_level;
    if (two_level && !ctx.two_level)
        throw std::invalid_argument("solve_sync: context has no coarse space");

    std::vector<Vector> x(p);
    std::vector<std::vector<Vector>> bufs(p);
    for (std::size_t s = 0; s < p; ++s) {
        x[s].assign(ctx.ws[s].omega.size(), 0.0);
        bufs[s] = make_link_buffers(ctx.ws[s]);
    }

    std::vector<Vector> xasm(p), resid(p);

    // Initial estimate from the zero guess: tau^(s) = b^(s).
    double sum0 = 0.0;
    for (std::size_t s = 0; s < p; ++s)
        sum0 += weighted_norm_contribution(ctx.ws[s], ctx.ws[s].b_loc);
    const double est0 = std::sqrt(sum0);

    RunReport rep;
    rep.engine = "sync";
    rep.residual_history.push_back(est0);

    std::size_t k = 0;
    bool converged = est0 <= cfg.epsilon;
    bool diverged = false;
    const double blowup = 1e6 * est0;

    Vector tau_tilde, x_tilde;
    while (!converged && !diverged && k < cfg.k_max) {
        ++k;

        if (two_level) {
            // Coarse residual from the current state.  Each subdomain's
            // contribution is accumulated into its own sub-vector first and
            // the sub-vectors are then summed ascending in s — the same
            // floating-point grouping the gather of per-process contributions
            // produces, which keeps the event-driven engine bit-compatible.
            tau_tilde.assign(ctx.dec.p, 0.0);
            for (std::size_t s = 0; s < p; ++s) {
                assemble_interior(ctx.ws[s], x[s], bufs[s], xasm[s]);
                local_residual(ctx.ws[s], xasm[s], resid[s]);
            }
            Vector tau_s(ctx.dec.p);
            for (std::size_t s = 0; s < p; ++s) {
                std::fill(tau_s.begin(), tau_s.end(), 0.0);
                accumulate_coarse_contribution(ctx.ws[s], resid[s], tau_s);
                for (std::size_t c = 0; c < tau_s.size(); ++c) tau_tilde[c] += tau_s[c];
            }
            x_tilde = solve_coarse(ctx, tau_tilde);
            ++rep.coarse_solves;
        }

        if (cfg.scheme == Scheme::two_level_mult) {
            // correction of own copy and of stored interface data, then f
            for (std::size_t s = 0; s < p; ++s) {
                apply_coarse_correction(ctx.ws[s], x_tilde, cfg.theta, x[s]);
                apply_coarse_correction_to_buffers(ctx.ws[s], x_tilde, cfg.theta, bufs[s]);
            }
            for (std::size_t s = 0; s < p; ++s) {
                assemble_interior(ctx.ws[s], x[s], bufs[s], xasm[s]);
                local_residual(ctx.ws[s], xasm[s], resid[s]);
                Vector v = apply_local_solver(ctx.ws[s], resid[s]);
                kern::ops().axpy(v.size(), 1.0, v.data(), x[s].data());
            }
        } else if (cfg.scheme == Scheme::two_level_add) {
            // coarse and fine corrections from the same tau, no intermediate
            // correction of the fine input
            for (std::size_t s = 0; s < p; ++s) {
                Vector v = apply_local_solver(ctx.ws[s], resid[s]);
                apply_coarse_correction(ctx.ws[s], x_tilde, cfg.theta, x[s]);
                kern::ops().axpy(v.size(), 1.0, v.data(), x[s].data());
            }
        } else {
            for (std::size_t s = 0; s < p; ++s) {
                assemble_interior(ctx.ws[s], x[s], bufs[s], xasm[s]);
                local_residual(ctx.ws[s], xasm[s], resid[s]);
                Vector v = apply_local_solver(ctx.ws[s], resid[s]);
                kern::ops().axpy(v.size(), 1.0, v.data(), x[s].data());
            }
        }

        exchange_all(ctx, x, bufs);

        // stopping estimate: weighted partition sum, ascending s
        double sum = 0.0;
        for (std::size_t s = 0; s < p; ++s) {
            assemble_interior(ctx.ws[s], x[s], bufs[s], xasm[s]);
            local_residual(ctx.ws[s], xasm[s], resid[s]);
            sum += weighted_norm_contribution(ctx.ws[s], resid[s]);
        }
        const double est = std::sqrt(sum);
        rep.residual_history.push_back(est);
        if (est <= cfg.epsilon)
            converged = true;
        else if (est > blowup)
            diverged = true;
    }

    SolveResult out;
    out.x = assemble_global(ctx, x);
    rep.iterations = static_cast<double>(k);
    rep.identical_corrections_avg =
        rep.coarse_solves > 0
            ? static_cast<double>(k) / static_cast<double>(rep.coarse_solves)
            : 0.0;
    rep.final_residual = global_residual_norm(A, b, out.x);
    rep.converged = converged;
    rep.diverged = diverged;
    out.report = std::move(rep);
    return out;
}

SolveResult solve_one_level(const SparseMatrix& A, const Vector& b,
                            const Decomposition& d, const SolverConfig& cfg) {
    if (cfg.scheme != Scheme::one_level)
        throw std::invalid_argument("solve_one_level: config.scheme must be one_level");
    SchwarzContext ctx = build_context(A, b, d, nullptr, cfg);
    return solve_sync(ctx, A, b);
}

SolveResult solve_two_level_sync(const SparseMatrix& A, const Vector& b,
                                 const Decomposition& d, const CoarseSpace& coarse,
                                 const SolverConfig& cfg) {
    if (cfg.scheme == Scheme::one_level)
        throw std::invalid_argument("solve_two_level_sync: config.scheme must be two-level");
    SchwarzContext ctx = build_context(A, b, d, &coarse, cfg);
    return solve_sync(ctx, A, b);
}

}  // namespace aschwarz
