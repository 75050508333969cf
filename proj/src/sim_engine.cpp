#include "aschwarz/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>

namespace aschwarz {

namespace {

long long auto_tick_guard(const SolverConfig& cfg, const DelaySchedule& delays) {
    double slow = 1.0;
    for (double v : delays.slowdowns) slow = std::max(slow, v);
    const long long rounds = static_cast<long long>(std::min<std::size_t>(cfg.k_max, 1u << 24)) + 2;
    const long long per_round = static_cast<long long>(std::ceil(slow)) *
                                (static_cast<long long>(delays.max_latency()) + 2) *
                                (static_cast<long long>(delays.skip_bound) + 1) * 4;
    return 1000 + rounds * per_round;
}

}  // namespace

SimResult run_simulator(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                        const CoarseSpace* coarse, const SolverConfig& cfg,
                        const DelaySchedule& delays, const SimOptions& options) {
    if (cfg.scheme != Scheme::one_level && coarse == nullptr)
        throw std::invalid_argument("run_simulator: two-level scheme needs a coarse space");
    delays.validate(dec.p);

    SchwarzContext ctx = build_context(A, b, dec, coarse, cfg);
    const std::size_t p = ctx.ws.size();

    // setup: initial residual reduction, consumed by its blocking wait
    double sum0 = 0.0;
    for (std::size_t s = 0; s < p; ++s)
        sum0 += weighted_norm_contribution(ctx.ws[s], ctx.ws[s].b_loc);

    Mailbox mb(delays.recv_slots);
    std::vector<SnapshotLog> snap_logs(options.record_snapshots ? p : 0);
    std::vector<std::vector<TraceRow>> traces(options.record_trace ? p : 0);

    std::deque<AsyncProcess> procs;
    for (std::size_t s = 0; s < p; ++s)
        procs.emplace_back(ctx, s, mb, delays, /*instant=*/false, sum0,
                           options.record_snapshots ? &snap_logs[s] : nullptr,
                           options.record_trace ? &traces[s] : nullptr);

    std::map<long long, std::vector<std::size_t>> agenda;
    std::vector<std::uint64_t> pass_idx(p, 0);
    for (std::size_t s = 0; s < p; ++s)
        if (!procs[s].stopped()) agenda[0].push_back(s);

    const long long guard =
        options.max_ticks >= 0 ? options.max_ticks : auto_tick_guard(cfg, delays);

    SimResult out;
    long long last_tick = 0;
    std::vector<char> skip(p, 0);

    while (!agenda.empty()) {
        const auto it = agenda.begin();
        const long long tick = it->first;
        std::vector<std::size_t> batch = std::move(it->second);
        agenda.erase(it);
        std::sort(batch.begin(), batch.end());
        last_tick = tick;

        if (tick > guard)
            throw std::runtime_error(
                "async simulator stalled: no stop after " + std::to_string(guard) +
                " ticks (deadlock guard)");

        for (std::size_t s : batch) {
            skip[s] = procs[s].should_skip(pass_idx[s]) ? 1 : 0;
            if (skip[s] && options.record_trace)
                traces[s].push_back({tick, 0, s, TraceEvent::pass_skip,
                                     static_cast<long long>(pass_idx[s])});
        }
        for (int micro = 0; micro < n_micro_stages; ++micro) {
            const SimStamp now{tick, micro};
            for (std::size_t s : batch)
                if (!skip[s]) procs[s].run_micro(micro, now);
        }
        for (std::size_t s : batch) {
            if (procs[s].stopped()) continue;
            ++pass_idx[s];
            long long next =
                std::llround(static_cast<double>(pass_idx[s]) * delays.slowdown(s));
            if (next <= tick) next = tick + 1;
            agenda[next].push_back(s);
        }

        if (options.record_iterates) {
            std::vector<Vector> xs(p);
            for (std::size_t s = 0; s < p; ++s) xs[s] = procs[s].x();
            out.iterates.push_back(assemble_global(ctx, xs));
        }
    }

    // report: all processes observe the same sequence of reduction values, so
    // they stop with identical histories and causes; process 0 speaks for the
    // run
    RunReport rep;
    rep.engine = "sim";
    rep.residual_history = procs[0].history();
    const StopCause cause = procs[0].cause();
    rep.converged = cause == StopCause::converged;
    rep.diverged = cause == StopCause::diverged;
    rep.sim_time = static_cast<double>(last_tick);

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
        out.corrections_per_install.push_back(procs[s].corrections_per_install());
        out.total_skips += procs[s].skips();
        out.max_skip_streak = std::max(out.max_skip_streak, procs[s].max_skip_streak());
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

    out.ticks = last_tick;
    out.dropped_messages = mb.dropped_messages();
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
    for (auto& tr : traces)
        out.trace.insert(out.trace.end(), tr.begin(), tr.end());
    std::stable_sort(out.trace.begin(), out.trace.end(),
                     [](const TraceRow& a, const TraceRow& b2) {
                         if (a.tick != b2.tick) return a.tick < b2.tick;
                         if (a.micro != b2.micro) return a.micro < b2.micro;
                         return a.process < b2.process;
                     });
    return out;
}

SimResult async_main_loop(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                          const CoarseSpace* coarse, const SolverConfig& cfg,
                          const DelaySchedule& delays, const SimOptions& options) {
    return run_simulator(A, b, dec, coarse, cfg, delays, options);
}

}  // namespace aschwarz
