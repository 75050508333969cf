#include "aschwarz/async_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aschwarz/kernels.hpp"

namespace aschwarz {

// ---------------------------------------------------------------------------
// Mailbox

Mailbox::Channel& Mailbox::channel(std::size_t sender, std::size_t receiver,
                                   ChannelKind kind) {
    return channels_[Key{sender, receiver, static_cast<int>(kind)}];
}

void Mailbox::post(std::size_t sender, std::size_t receiver, ChannelKind kind,
                   long long round, Vector payload, SimStamp arrival) {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();

    Channel& ch = channel(sender, receiver, kind);
    // FIFO clamp: a message never arrives before one posted earlier on the
    // same channel.
    if (ch.any_posted && arrival < ch.last_arrival) arrival = ch.last_arrival;
    ch.last_arrival = arrival;
    ch.any_posted = true;

    Message m;
    m.sender = sender;
    m.round = round;
    m.payload = std::move(payload);
    m.arrival = arrival;
    m.seq = next_seq_++;
    ch.q.push_back(std::move(m));

    if (kind == ChannelKind::fine) {
        // bounded reception slots: keep the newest recv_slots undelivered
        // messages, drop the oldest
        while (ch.q.size() > static_cast<std::size_t>(recv_slots_)) {
            ch.q.pop_front();
            ++dropped_;
        }
    }
}

std::vector<Message> Mailbox::poll_fine(std::size_t receiver, std::size_t sender,
                                        SimStamp now) {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();

    Channel& ch = channel(sender, receiver, ChannelKind::fine);
    std::vector<Message> out;
    while (!ch.q.empty() && ch.q.front().arrival < now) {
        out.push_back(std::move(ch.q.front()));
        ch.q.pop_front();
    }
    return out;
}

bool Mailbox::round_ready(std::size_t receiver, std::size_t sender, ChannelKind kind,
                          long long round, SimStamp now) {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();

    Channel& ch = channel(sender, receiver, kind);
    return !ch.q.empty() && ch.q.front().round == round && ch.q.front().arrival < now;
}

Message Mailbox::take_round(std::size_t receiver, std::size_t sender, ChannelKind kind,
                            long long round) {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();

    Channel& ch = channel(sender, receiver, kind);
    if (ch.q.empty() || ch.q.front().round != round)
        throw std::logic_error("mailbox: taking a collective message that is not ready");
    Message m = std::move(ch.q.front());
    ch.q.pop_front();
    return m;
}

std::optional<SimStamp> Mailbox::last_posted_arrival(std::size_t sender,
                                                     std::size_t receiver,
                                                     ChannelKind kind) {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();

    Channel& ch = channel(sender, receiver, kind);
    if (!ch.any_posted) return std::nullopt;
    return ch.last_arrival;
}

long long Mailbox::dropped_messages() {
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (locking_) lock.lock();
    return dropped_;
}

// ---------------------------------------------------------------------------
// Trace

const char* trace_event_name(TraceEvent e) {
    switch (e) {
        case TraceEvent::pass_skip: return "pass_skip";
        case TraceEvent::coarse_phase0: return "coarse_phase0";
        case TraceEvent::coarse_phase1: return "coarse_phase1";
        case TraceEvent::coarse_install: return "coarse_install";
        case TraceEvent::correction: return "correction";
        case TraceEvent::fine_update: return "fine_update";
        case TraceEvent::send_fine: return "send_fine";
        case TraceEvent::reduce_round: return "reduce_round";
        case TraceEvent::stop_converged: return "stop_converged";
        case TraceEvent::stop_kmax: return "stop_kmax";
        case TraceEvent::stop_diverged: return "stop_diverged";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// AsyncProcess

namespace {
constexpr std::size_t root_process = 0;
}

AsyncProcess::AsyncProcess(const SchwarzContext& ctx, std::size_t s, Mailbox& mb,
                           const DelaySchedule& delays, bool instant, double initial_sum,
                           SnapshotLog* snapshot_log, std::vector<TraceRow>* trace)
    : ctx_(ctx),
      ws_(ctx.ws[s]),
      s_(s),
      p_(ctx.ws.size()),
      mb_(mb),
      delays_(delays),
      instant_(instant),
      snapshot_log_(snapshot_log),
      trace_(trace) {
    fine_init();
    x_tilde_.assign(p_, 0.0);
    tau_local_.assign(p_, 0.0);
    last_completed_sum_ = initial_sum;
    est0_ = std::sqrt(initial_sum);
    history_.push_back(est0_);
    if (est0_ <= ctx_.cfg.epsilon) cause_ = StopCause::converged;
}

void AsyncProcess::fine_init() {
    x_loc_.assign(ws_.omega.size(), 0.0);
    fine_bufs_ = make_link_buffers(ws_);
    snap_own_.assign(ws_.omega.size(), 0.0);
    snap_bufs_ = make_link_buffers(ws_);
    xasm_.assign(ws_.ext.size(), 0.0);
    resid_.assign(ws_.omega.size(), 0.0);
}

bool AsyncProcess::should_skip(std::uint64_t pass) {
    if (stopped()) return false;
    if (delays_.wants_skip(s_, pass) && streak_ < delays_.skip_bound) {
        ++streak_;
        max_streak_ = std::max(max_streak_, streak_);
        ++skips_;
        return true;
    }
    streak_ = 0;
    return false;
}

void AsyncProcess::run_micro(int micro, SimStamp now) {
    switch (micro) {
        case 0:
        case 1:
        case 2:
        case 3:
            if (ctx_.cfg.scheme != Scheme::one_level) coarse_step(micro, now);
            break;
        case 4: correction_stage(now); break;
        case 5: recv_half(now); break;
        case 6: fine_stage(now); break;
        case 7: recv_half(now); break;
        case 8: residual_stage(now); break;
        default: throw std::logic_error("async: bad micro stage");
    }
}

void AsyncProcess::trace(SimStamp now, TraceEvent e, long long detail) {
    if (trace_) trace_->push_back({now.tick, now.micro, s_, e, detail});
}

// ---------------------------------------------------------------------------
// coarse procedure (Algorithms "ISYNC-based ... coarse solution")

void AsyncProcess::coarse_step(int slot, SimStamp now) {
    if (ctx_.cfg.coarse_layout == CoarseLayout::replicated)
        coarse_step_replicated(slot, now);
    else
        coarse_step_centralized(slot, now);
}

void AsyncProcess::coarse_step_replicated(int slot, SimStamp now) {
    if (slot == 0 && phase_ == 0) {
        if (ctx_.cfg.isync == IsyncVariant::xtau) {
            isynchronize_start(now);
            phase_ = 1;
        } else {
            single_phase_start(now);
            phase_ = 2;
        }
    } else if (slot == 1 && phase_ == 1) {
        if (snapshot_complete(now)) {
            build_tau_from_snapshot(now);
            start_gather(now);
            phase_ = 2;
        }
    } else if ((slot == 2 || slot == 3) && phase_ == 2) {
        if (gather_complete(now)) {
            Vector total = collect_gather_sum();
            Vector xt = solve_coarse(ctx_, total);
            if (snapshot_log_)
                snapshot_log_->solved_rhs.push_back({coarse_round_, s_, total});
            install(std::move(xt), now);
        }
    }
}

void AsyncProcess::coarse_step_centralized(int slot, SimStamp now) {
    const bool is_root = s_ == root_process;
    if (slot == 0 && phase_ == 0) {
        if (ctx_.cfg.isync == IsyncVariant::xtau) {
            isynchronize_start(now);
            phase_ = 1;
        } else {
            single_phase_start(now);
            phase_ = 2;
        }
    } else if (slot == 1 && phase_ == 1) {
        if (snapshot_complete(now)) {
            build_tau_from_snapshot(now);
            start_gather(now);
            phase_ = 2;
        }
    } else if ((slot == 2 || slot == 3) && phase_ == 2) {
        if (is_root) {
            if (gather_complete(now)) {
                Vector total = collect_gather_sum();
                Vector xt = solve_coarse(ctx_, total);
                if (snapshot_log_)
                    snapshot_log_->solved_rhs.push_back({coarse_round_, s_, total});
                for (std::size_t r = 0; r < p_; ++r)
                    if (r != s_) post_to(r, ChannelKind::bcast, coarse_round_, xt, now);
                install(std::move(xt), now);
            }
        } else {
            if (mb_.round_ready(s_, root_process, ChannelKind::bcast, coarse_round_, now)) {
                Message m =
                    mb_.take_round(s_, root_process, ChannelKind::bcast, coarse_round_);
                install(std::move(m.payload), now);
            }
        }
    }
}

void AsyncProcess::isynchronize_start(SimStamp now) {
    ++coarse_round_;
    snap_own_ = x_loc_;
    if (snapshot_log_) snapshot_log_->snapshots.push_back({coarse_round_, s_, x_loc_});
    for (const auto& link : ws_.links) {
        if (link.send_pos.empty()) continue;
        Vector payload(link.send_pos.size());
        for (std::size_t i = 0; i < link.send_pos.size(); ++i)
            payload[i] = x_loc_[static_cast<std::size_t>(link.send_pos[i])];
        post_to(static_cast<std::size_t>(link.peer), ChannelKind::snap, coarse_round_,
                std::move(payload), now);
    }
    trace(now, TraceEvent::coarse_phase0, coarse_round_);
}

void AsyncProcess::single_phase_start(SimStamp now) {
    ++coarse_round_;
    // single-phase variant: coarse contribution from the current, possibly
    // inconsistent interface data (no snapshot exchange)
    assemble_interior(ws_, x_loc_, fine_bufs_, xasm_);
    local_residual(ws_, xasm_, resid_);
    std::fill(tau_local_.begin(), tau_local_.end(), 0.0);
    accumulate_coarse_contribution(ws_, resid_, tau_local_);
    start_gather(now);
    trace(now, TraceEvent::coarse_phase0, coarse_round_);
}

bool AsyncProcess::snapshot_complete(SimStamp now) const {
    for (const auto& link : ws_.links) {
        if (link.recv_ext_pos.empty()) continue;
        if (!mb_.round_ready(s_, static_cast<std::size_t>(link.peer), ChannelKind::snap,
                             coarse_round_, now))
            return false;
    }
    return true;
}

void AsyncProcess::build_tau_from_snapshot(SimStamp now) {
    for (std::size_t li = 0; li < ws_.links.size(); ++li) {
        const auto& link = ws_.links[li];
        if (link.recv_ext_pos.empty()) continue;
        Message m = mb_.take_round(s_, static_cast<std::size_t>(link.peer),
                                   ChannelKind::snap, coarse_round_);
        snap_bufs_[li] = std::move(m.payload);
    }
    assemble_interior(ws_, snap_own_, snap_bufs_, xasm_);
    local_residual(ws_, xasm_, resid_);
    std::fill(tau_local_.begin(), tau_local_.end(), 0.0);
    accumulate_coarse_contribution(ws_, resid_, tau_local_);
    trace(now, TraceEvent::coarse_phase1, coarse_round_);
}

void AsyncProcess::start_gather(SimStamp now) {
    if (ctx_.cfg.coarse_layout == CoarseLayout::replicated) {
        for (std::size_t r = 0; r < p_; ++r)
            if (r != s_) post_to(r, ChannelKind::gather, coarse_round_, tau_local_, now);
    } else if (s_ != root_process) {
        post_to(root_process, ChannelKind::gather, coarse_round_, tau_local_, now);
    }
}

bool AsyncProcess::gather_complete(SimStamp now) const {
    for (std::size_t r = 0; r < p_; ++r) {
        if (r == s_) continue;
        if (!mb_.round_ready(s_, r, ChannelKind::gather, coarse_round_, now)) return false;
    }
    return true;
}

Vector AsyncProcess::collect_gather_sum() {
    Vector total(p_, 0.0);
    for (std::size_t r = 0; r < p_; ++r) {
        if (r == s_) {
            for (std::size_t c = 0; c < p_; ++c) total[c] += tau_local_[c];
        } else {
            Message m = mb_.take_round(s_, r, ChannelKind::gather, coarse_round_);
            for (std::size_t c = 0; c < p_; ++c) total[c] += m.payload[c];
        }
    }
    return total;
}

void AsyncProcess::install(Vector x_tilde, SimStamp now) {
    x_tilde_ = std::move(x_tilde);
    ++installs_;
    corrections_per_install_.push_back(0);
    nbidentcorr_ = 0;
    phase_ = 0;
    trace(now, TraceEvent::coarse_install, coarse_round_);
}

// ---------------------------------------------------------------------------
// fine iteration stages

void AsyncProcess::correction_stage(SimStamp now) {
    if (ctx_.cfg.scheme != Scheme::two_level_mult) return;
    if (nbidentcorr_ < ctx_.cfg.zeta) {
        apply_coarse_correction(ws_, x_tilde_, ctx_.cfg.theta, x_loc_);
        ++corrections_total_;
        if (!corrections_per_install_.empty()) ++corrections_per_install_.back();
        ++nbidentcorr_;
        trace(now, TraceEvent::correction, static_cast<long long>(nbidentcorr_));
        send_half(now);
    }
}

void AsyncProcess::send_half(SimStamp now) {
    for (const auto& link : ws_.links) {
        if (link.send_pos.empty()) continue;
        const std::size_t peer = static_cast<std::size_t>(link.peer);
        // ISSend semantics: a new send only once the previous one completed
        auto last = mb_.last_posted_arrival(s_, peer, ChannelKind::fine);
        if (last && !(*last < now)) continue;
        Vector payload(link.send_pos.size());
        for (std::size_t i = 0; i < link.send_pos.size(); ++i)
            payload[i] = x_loc_[static_cast<std::size_t>(link.send_pos[i])];
        post_to(peer, ChannelKind::fine, 0, std::move(payload), now);
        trace(now, TraceEvent::send_fine, static_cast<long long>(peer));
    }
}

void AsyncProcess::recv_half(SimStamp now) {
    for (std::size_t li = 0; li < ws_.links.size(); ++li) {
        const auto& link = ws_.links[li];
        if (link.recv_ext_pos.empty()) continue;
        auto msgs = mb_.poll_fine(s_, static_cast<std::size_t>(link.peer), now);
        for (auto& m : msgs) fine_bufs_[li] = std::move(m.payload);  // newest wins
    }
}

void AsyncProcess::async_send_recv(SimStamp now) {
    send_half(now);
    recv_half(now);
}

void AsyncProcess::fine_stage(SimStamp now) {
    assemble_interior(ws_, x_loc_, fine_bufs_, xasm_);
    local_residual(ws_, xasm_, resid_);
    Vector v = apply_local_solver(ws_, resid_);
    if (ctx_.cfg.scheme == Scheme::two_level_add && nbidentcorr_ < ctx_.cfg.zeta) {
        // additive scheme: coarse and fine corrections from the same residual
        apply_coarse_correction(ws_, x_tilde_, ctx_.cfg.theta, x_loc_);
        ++corrections_total_;
        if (!corrections_per_install_.empty()) ++corrections_per_install_.back();
        ++nbidentcorr_;
        trace(now, TraceEvent::correction, static_cast<long long>(nbidentcorr_));
    }
    kern::ops().axpy(v.size(), 1.0, v.data(), x_loc_.data());
    ++fine_updates_;
    trace(now, TraceEvent::fine_update, fine_updates_);
    send_half(now);
}

void AsyncProcess::residual_stage(SimStamp now) {
    assemble_interior(ws_, x_loc_, fine_bufs_, xasm_);
    local_residual(ws_, xasm_, resid_);
    const double my_contrib = weighted_norm_contribution(ws_, resid_);

    double total = 0.0;
    bool ready = false;
    if (pending_round_ == 0) {
        // inactive request (the setup round was consumed by its blocking
        // wait): the test trivially succeeds and re-reads the old value
        ready = true;
        total = last_completed_sum_;
    } else {
        ready = true;
        for (std::size_t r = 0; r < p_ && ready; ++r)
            if (r != s_ &&
                !mb_.round_ready(s_, r, ChannelKind::reduce, pending_round_, now))
                ready = false;
        if (ready) {
            for (std::size_t r = 0; r < p_; ++r) {
                if (r == s_) {
                    total += own_pending_contrib_;
                } else {
                    Message m = mb_.take_round(s_, r, ChannelKind::reduce, pending_round_);
                    total += m.payload[0];
                }
            }
            last_completed_sum_ = total;
        }
    }
    if (!ready) return;

    const double est = std::sqrt(total);
    history_.push_back(est);

    own_pending_contrib_ = my_contrib;
    for (std::size_t r = 0; r < p_; ++r)
        if (r != s_)
            post_to(r, ChannelKind::reduce, next_round_, Vector{my_contrib}, now);
    pending_round_ = next_round_;
    ++next_round_;
    ++k_rounds_;
    trace(now, TraceEvent::reduce_round, k_rounds_);

    if (est <= ctx_.cfg.epsilon)
        stop(StopCause::converged, now);
    else if (est > 1e6 * est0_)
        stop(StopCause::diverged, now);
    else if (k_rounds_ >= static_cast<long long>(ctx_.cfg.k_max))
        stop(StopCause::k_max, now);
}

void AsyncProcess::stop(StopCause cause, SimStamp now) {
    cause_ = cause;
    switch (cause) {
        case StopCause::converged: trace(now, TraceEvent::stop_converged); break;
        case StopCause::k_max: trace(now, TraceEvent::stop_kmax); break;
        case StopCause::diverged: trace(now, TraceEvent::stop_diverged); break;
        case StopCause::running: break;
    }
}

void AsyncProcess::post_to(std::size_t peer, ChannelKind kind, long long round,
                           Vector payload, SimStamp now) {
    std::uint64_t& seq = send_seq_[{peer, static_cast<int>(kind)}];
    SimStamp arrival{-1, 0};
    if (!instant_) {
        const int lat = delays_.latency(s_, peer, kind, seq);
        arrival = SimStamp{now.tick + lat, now.micro};
    }
    ++seq;
    mb_.post(s_, peer, kind, round, std::move(payload), arrival);
}

}  // namespace aschwarz
