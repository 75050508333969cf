#pragma once

// Core of the asynchronous engines: a deterministic mailbox (per-link FIFO
// channels with bounded reception slots) and the per-process state machine
// that executes one local iteration of the two-level asynchronous solver as
// a fixed sequence of micro-stages.
//
// A local iteration ("pass") is split into micro-stages so that message
// visibility can be controlled exactly: a message sent at stamp (tick, micro)
// becomes visible to any poll at a strictly later stamp.  With zero latency,
// data sent by one micro-stage is seen by the following micro-stage of every
// process in the same tick, which is what makes the zero-delay schedule
// reproduce the synchronous iteration bit for bit.
//
// Micro-stage table (one pass of process s):
//   0  coarse phase 0: start the snapshot exchange (or, in the single-phase
//      variant, build the coarse contribution from current data directly)
//   1  coarse phase 1: snapshot completion test -> coarse contribution,
//      start gather
//   2  coarse phase 2: gather/broadcast completion test -> solve/install
//   3  coarse phase 2, second poll (lets a root's same-tick broadcast land)
//   4  coarse correction of the local copy (bounded by zeta) + send half of
//      the interface exchange
//   5  receive half of the interface exchange
//   6  local fine update f + send half
//   7  receive half
//   8  local residual, non-blocking reduction test/post, stop decision

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "aschwarz/delay.hpp"
#include "aschwarz/workspace.hpp"

namespace aschwarz {

inline constexpr int n_micro_stages = 9;

struct SimStamp {
    long long tick = 0;
    int micro = 0;
};

constexpr bool operator<(const SimStamp& a, const SimStamp& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.micro < b.micro;
}

struct Message {
    std::size_t sender = 0;
    long long round = 0;       // collective sequence number (0 for fine data)
    Vector payload;
    SimStamp arrival;
    std::uint64_t seq = 0;     // global post order, ties broken FIFO
};

// Deterministic message store.  Channels are keyed (sender, receiver, kind);
// each is FIFO by arrival stamp (arrivals are clamped so a later post never
// lands before an earlier one).  Fine channels model the bounded reception
// slots: at most `recv_slots` undelivered messages are kept per link, oldest
// dropped first.  Optional internal locking serializes access for the
// threaded engine; the simulator runs unlocked.
class Mailbox {
public:
    explicit Mailbox(int recv_slots = 2) : recv_slots_(recv_slots) {}

    void enable_locking() { locking_ = true; }

    void post(std::size_t sender, std::size_t receiver, ChannelKind kind, long long round,
              Vector payload, SimStamp arrival);

    // All fine messages on (sender -> receiver) with arrival < now, FIFO,
    // removed from the channel.
    std::vector<Message> poll_fine(std::size_t receiver, std::size_t sender, SimStamp now);

    // Whether the round-numbered collective message on (sender -> receiver,
    // kind) has arrived (arrival < now).  Rounds are consumed in order.
    bool round_ready(std::size_t receiver, std::size_t sender, ChannelKind kind,
                     long long round, SimStamp now);

    // Removes and returns that message.  Throws if it is not ready-checked
    // first (protocol error).
    Message take_round(std::size_t receiver, std::size_t sender, ChannelKind kind,
                       long long round);

    // Arrival stamp of the last message posted on the channel; nullopt if
    // none was ever posted (a null send request).
    std::optional<SimStamp> last_posted_arrival(std::size_t sender, std::size_t receiver,
                                                ChannelKind kind);

    long long dropped_messages();

private:
    struct Channel {
        std::deque<Message> q;
        SimStamp last_arrival{-1, 0};
        bool any_posted = false;
    };
    using Key = std::tuple<std::size_t, std::size_t, int>;

    Channel& channel(std::size_t sender, std::size_t receiver, ChannelKind kind);

    std::map<Key, Channel> channels_;
    int recv_slots_;
    std::uint64_t next_seq_ = 0;
    long long dropped_ = 0;
    bool locking_ = false;
    std::mutex mutex_;
};

// Optional run recorders (null pointers disable them).
struct SnapshotRecord {
    long long round = 0;
    std::size_t process = 0;
    Vector x_copy;  // local part at phase-0 time
};
struct CoarseRhsRecord {
    long long round = 0;
    std::size_t process = 0;
    Vector tau;  // the RHS actually solved
};
struct SnapshotLog {
    std::vector<SnapshotRecord> snapshots;
    std::vector<CoarseRhsRecord> solved_rhs;
};

enum class TraceEvent {
    pass_skip,
    coarse_phase0,
    coarse_phase1,
    coarse_install,
    correction,
    fine_update,
    send_fine,
    reduce_round,
    stop_converged,
    stop_kmax,
    stop_diverged,
};
const char* trace_event_name(TraceEvent e);
struct TraceRow {
    long long tick = 0;
    int micro = 0;
    std::size_t process = 0;
    TraceEvent event = TraceEvent::fine_update;
    long long detail = 0;
};

enum class StopCause { running, converged, k_max, diverged };

// One process of the asynchronous solver.  The engine (event-driven or
// threaded) owns the scheduling; this class owns all per-process state and
// the micro-stage bodies.  `instant` makes every posted message immediately
// visible (the threaded engine's real-queue semantics); otherwise arrivals
// are stamped now.tick + schedule latency.
class AsyncProcess {
public:
    AsyncProcess(const SchwarzContext& ctx, std::size_t s, Mailbox& mb,
                 const DelaySchedule& delays, bool instant, double initial_sum,
                 SnapshotLog* snapshot_log, std::vector<TraceRow>* trace);

    // Algorithm "FineInit": interface buffers zeroed, send requests null.
    void fine_init();

    void run_micro(int micro, SimStamp now);

    // Active-set rule with the consecutive-skip bound applied; counts skips.
    bool should_skip(std::uint64_t pass);

    bool stopped() const { return cause_ != StopCause::running; }
    StopCause cause() const { return cause_; }
    const std::vector<double>& history() const { return history_; }
    const Vector& x() const { return x_loc_; }
    long long fine_updates() const { return fine_updates_; }
    long long installs() const { return installs_; }
    long long corrections_total() const { return corrections_total_; }
    long long skips() const { return skips_; }
    long long max_skip_streak() const { return max_streak_; }
    long long rounds_completed() const { return k_rounds_; }
    long long coarse_rounds_started() const { return coarse_round_; }
    const std::vector<long long>& corrections_per_install() const {
        return corrections_per_install_;
    }
    int phase() const { return phase_; }
    std::size_t nbidentcorr() const { return nbidentcorr_; }
    const std::vector<Vector>& fine_buffers() const { return fine_bufs_; }
    const Vector& coarse_correction() const { return x_tilde_; }

    // One full AsyncSendRecv (send half + receive half), for direct tests.
    void async_send_recv(SimStamp now);

private:
    // coarse procedure, one micro slot of the sequential phase tests
    void coarse_step(int slot, SimStamp now);
    void coarse_step_replicated(int slot, SimStamp now);
    void coarse_step_centralized(int slot, SimStamp now);
    void isynchronize_start(SimStamp now);       // phase 0 of ISYNC(x, tau)
    void single_phase_start(SimStamp now);       // ISYNC(tau): current-data tau
    bool snapshot_complete(SimStamp now) const;  // TestAll of phase 1
    void build_tau_from_snapshot(SimStamp now);
    void start_gather(SimStamp now);
    bool gather_complete(SimStamp now) const;
    Vector collect_gather_sum();
    void install(Vector x_tilde, SimStamp now);

    void correction_stage(SimStamp now);
    void send_half(SimStamp now);
    void recv_half(SimStamp now);
    void fine_stage(SimStamp now);
    void residual_stage(SimStamp now);

    void post_to(std::size_t peer, ChannelKind kind, long long round, Vector payload,
                 SimStamp now);
    void trace(SimStamp now, TraceEvent e, long long detail = 0);
    void stop(StopCause cause, SimStamp now);

    const SchwarzContext& ctx_;
    const SubdomainWorkspace& ws_;
    std::size_t s_;
    std::size_t p_;
    Mailbox& mb_;
    const DelaySchedule& delays_;
    bool instant_;
    SnapshotLog* snapshot_log_;
    std::vector<TraceRow>* trace_;

    // fine state
    Vector x_loc_;
    std::vector<Vector> fine_bufs_;
    Vector xasm_, resid_;

    // coarse state (ISYNC machine)
    int phase_ = 0;
    long long coarse_round_ = 0;
    Vector snap_own_;
    std::vector<Vector> snap_bufs_;
    Vector tau_local_;
    Vector x_tilde_;
    std::size_t nbidentcorr_ = 0;

    // pipelined residual reduction
    long long pending_round_ = 0;  // 0 = inactive request (setup round consumed)
    long long next_round_ = 2;
    double own_pending_contrib_ = 0.0;
    double last_completed_sum_ = 0.0;
    double est0_ = 0.0;
    long long k_rounds_ = 0;
    std::vector<double> history_;
    StopCause cause_ = StopCause::running;

    // counters
    long long fine_updates_ = 0;
    long long installs_ = 0;
    long long corrections_total_ = 0;
    long long skips_ = 0;
    long long streak_ = 0;
    long long max_streak_ = 0;
    std::vector<long long> corrections_per_install_;
    std::map<std::pair<std::size_t, int>, std::uint64_t> send_seq_;
};

}  // namespace aschwarz
