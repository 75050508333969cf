#pragma once

// Deterministic discrete-event simulator for the asynchronous solver.  Every
// process executes passes of micro-stages at integer ticks (pass j of process
// s runs at tick round(j * slowdown_s)); all events are globally ordered by
// (tick, micro, process), and message arrivals follow the delay schedule, so
// a run is a pure function of (problem, config, schedule).

#include <vector>

#include "aschwarz/async_core.hpp"
#include "aschwarz/sync_solver.hpp"

namespace aschwarz {

struct SimOptions {
    bool record_iterates = false;   // assembled global iterate after every tick
    bool record_trace = false;      // per-event trace rows
    bool record_snapshots = false;  // phase-0 snapshots and solved coarse RHS
    long long max_ticks = -1;       // stall guard; -1 picks a generous bound
};

struct SimResult {
    SolveResult result;
    std::vector<Vector> iterates;
    std::vector<TraceRow> trace;
    SnapshotLog snapshots;
    long long ticks = 0;
    long long dropped_messages = 0;
    long long total_skips = 0;
    long long max_skip_streak = 0;
    std::vector<long long> fine_updates_per_process;
    std::vector<long long> installs_per_process;
    std::vector<std::vector<long long>> corrections_per_install;
};

// Builds the context and runs the event loop until every process has stopped.
// `coarse` may be null only for the one-level scheme.  Throws
// std::runtime_error if the tick guard trips (a genuine stall).
SimResult run_simulator(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                        const CoarseSpace* coarse, const SolverConfig& cfg,
                        const DelaySchedule& delays, const SimOptions& options = {});

// Operation-level name used by the runtime contract: identical to
// run_simulator.
SimResult async_main_loop(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                          const CoarseSpace* coarse, const SolverConfig& cfg,
                          const DelaySchedule& delays, const SimOptions& options = {});

}  // namespace aschwarz
