#pragma once

// Threaded engine: the same per-process state machine as the simulator, but
// each process runs on its own OS thread against a locked mailbox with
// immediately-visible messages.  Timing (and therefore iterate sequences) is
// whatever the hardware produces; the residual histories are still identical
// across processes within a run, because every process sums the same posted
// reduction contributions in the same order.

#include <vector>

#include "aschwarz/async_core.hpp"
#include "aschwarz/sync_solver.hpp"

namespace aschwarz {

struct ThreadResult {
    SolveResult result;
    SnapshotLog snapshots;
    std::vector<long long> fine_updates_per_process;
    std::vector<long long> installs_per_process;
};

// Runs the asynchronous solver on dec.p threads.  Slowdowns in the schedule
// become per-pass sleeps and the skip rule is honored per pass; latencies are
// meaningless here (messages are visible as soon as they are posted), the
// reception-slot bound still applies.  `coarse` may be null only for
// one_level.
ThreadResult run_threads(const SparseMatrix& A, const Vector& b, const Decomposition& dec,
                         const CoarseSpace* coarse, const SolverConfig& cfg,
                         const DelaySchedule& delays, bool record_snapshots = false);

}  // namespace aschwarz
