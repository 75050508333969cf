#include "aschwarz/thread_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

namespace aschwarz {

ThreadResult run_threads(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                         const CoarseSpace* coarse, const SolverConfig& cfg,
                         const DelaySchedule& delays, bool record_snapshots) {
    if (cfg.scheme != Scheme::one_level && coarse == nullptr)
        throw std::invalid_argument("run_threads: two-level scheme needs a coarse space");
    delays.validate(dec.p);

    SchwarzContext ctx = build_context(A, b, dec, coarse, cfg);
    const std::size_t p = ctx.ws.size();

    double sum0 = 0.0;
    for (std::size_t s = 0; s < p; ++s)
        sum0 += weighted_norm_contribution(ctx.ws[s], ctx.ws[s].b_loc);

    Mailbox mb(delays.recv_slots);
    mb.enable_locking();
    std::vector<SnapshotLog> snap_logs(record_snapshots ? p : 0);

    std::deque<AsyncProcess> procs;
    for (std::size_t s = 0; s < p; ++s)
        procs.emplace_back(ctx, s, mb, delays, /*instant=*/true, sum0,
                           record_snapshots ? &snap_logs[s] : nullptr, nullptr);

    const auto t0 = std::chrono::steady_clock::now();
    {
        std::vector<std::thread> threads;
        threads.reserve(p);
        for (std::size_t s = 0; s < p; ++s) {
            threads.emplace_back([&, s] {
                AsyncProcess& proc = procs[s];
                const double slow = delays.slowdown(s);
                const SimStamp now{0, 0};  // instant arrivals are always visible
                std::uint64_t pass = 0;
                while (!proc.stopped()) {
                    if (!proc.should_skip(pass)) {
                        for (int micro = 0; micro < n_micro_stages; ++micro)
                            proc.run_micro(micro, now);
                    }
                    ++pass;
                    if (slow > 1.0)
                        std::this_thread::sleep_for(std::chrono::microseconds(
                            std::llround((slow - 1.0) * 100.0)));
                    else
                        std::this_thread::yield();
                }
            });
        }
        for (auto& t : threads) t.join();
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    ThreadResult out;
    RunReport rep;
    rep.engine = "threads";
    rep.residual_history = procs[0].history();
    const StopCause cause = procs[0].cause();
    rep.converged = cause == StopCause::converged;
    rep.diverged = cause == StopCause::diverged;
    rep.sim_time = wall_ms;

    long long updates = 0, max_installs = 0, corr_sum = 0, corr_buckets = 0;
    for (std::size_t s = 0; s < p; ++s) {
        updates += procs[s].fine_updates();
        max_installs = std::max(max_installs, procs[s].installs());
        for (long long c : procs[s].corrections_per_install()) {
            corr_sum += c;
            ++corr_buckets;
        }
        out.fine_updates_per_process.push_back(procs[s].fine_updates());
        out.installs_per_process.push_back(procs[s].installs());
    }
    rep.iterations = static_cast<double>(updates) / static_cast<double>(p);
    rep.coarse_solves = static_cast<std::size_t>(max_installs);
    rep.identical_corrections_avg =
        corr_buckets > 0 ? static_cast<double>(corr_sum) / static_cast<double>(corr_buckets)
                         : 0.0;

    std::vector<Vector> xs(p);
    for (std::size_t s = 0; s < p; ++s) xs[s] = procs[s].x();
    out.result.x = assemble_global(ctx, xs);
    rep.final_residual = global_residual_norm(A, b, out.result.x);
    out.result.report = std::move(rep);

    for (auto& log : snap_logs) {
        out.snapshots.snapshots.insert(out.snapshots.snapshots.end(),
                                       log.snapshots.begin(), log.snapshots.end());
        out.snapshots.solved_rhs.insert(out.snapshots.solved_rhs.end(),
                                        log.solved_rhs.begin(), log.solved_rhs.end());
    }
    std::stable_sort(out.snapshots.snapshots.begin(), out.snapshots.snapshots.end(),
                     [](const SnapshotRecord& a, const SnapshotRecord& b2) {
                         return a.round != b2.round ? a.round < b2.round
                                                    : a.process < b2.process;
                     });
    std::stable_sort(out.snapshots.solved_rhs.begin(), out.snapshots.solved_rhs.end(),
                     [](const CoarseRhsRecord& a, const CoarseRhsRecord& b2) {
                         return a.round != b2.round ? a.round < b2.round
                                                    : a.process < b2.process;
                     });
    return out;
}

}  // namespace aschwarz
