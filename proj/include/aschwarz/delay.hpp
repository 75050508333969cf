#pragma once

// Programmable message-delay schedules for the asynchronous engines.  A
// schedule decides, deterministically, the latency of every message, the
// per-process slowdown factors, and the active-set rule (which passes a
// process may skip, bounded so that every process keeps making progress).

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace aschwarz {

enum class DelayMode { zero, fixed, seeded_random, script };

// Message channel kinds; part of the latency-hash domain so different
// traffic classes draw independent delays.
enum class ChannelKind : int { fine = 0, snap = 1, gather = 2, bcast = 3, reduce = 4 };

struct DelaySchedule {
    DelayMode mode = DelayMode::zero;
    int fixed_delay = 0;                 // mode fixed
    int max_delay = 0;                   // mode seeded_random: latency in [0, max_delay]
    std::uint64_t seed = 0;              // seeded_random and the active-set rule
    std::vector<double> slowdowns;       // per-process factors >= 1; empty = all 1
    int default_latency = 0;             // mode script
    std::map<std::pair<std::size_t, std::size_t>, int> link_latency;  // script overrides
    double skip_rate = 0.0;              // active-set rule: chance a pass is skipped
    int skip_bound = 10;                 // B: max consecutive skipped passes
    int recv_slots = 2;                  // nrcvreqs_per_neighb

    // Throws std::invalid_argument when a field is out of range for p processes.
    void validate(std::size_t p) const;

    double slowdown(std::size_t s) const;
    int max_latency() const;

    // Latency of message seq on link s -> r for the given channel kind.
    int latency(std::size_t s, std::size_t r, ChannelKind kind, std::uint64_t seq) const;

    // Active-set rule: whether process s would skip pass `pass` (before the
    // consecutive-skip bound is enforced by the engine).
    bool wants_skip(std::size_t s, std::uint64_t pass) const;
};

// splitmix64: the deterministic hash behind seeded delays and skips.
std::uint64_t splitmix64(std::uint64_t z);

DelaySchedule delay_schedule_from_json(const std::string& text);
DelaySchedule delay_schedule_from_file(const std::string& path);
std::string delay_schedule_to_json(const DelaySchedule& d);

}  // namespace aschwarz
