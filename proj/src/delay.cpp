#include "aschwarz/delay.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace aschwarz {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

std::uint64_t hash_fields(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c, std::uint64_t d) {
    std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    h = splitmix64(h ^ d);
    return h;
}

}  // namespace

void DelaySchedule::validate(std::size_t p) const {
    if (fixed_delay < 0) throw std::invalid_argument("delay: fixed_delay must be >= 0");
    if (max_delay < 0) throw std::invalid_argument("delay: max_delay must be >= 0");
    if (default_latency < 0) throw std::invalid_argument("delay: default_latency must be >= 0");
    if (!slowdowns.empty() && slowdowns.size() != p)
        throw std::invalid_argument("delay: slowdowns must list one factor per process");
    for (double f : slowdowns)
        if (!(f >= 1.0)) throw std::invalid_argument("delay: slowdown factors must be >= 1");
    for (const auto& [link, lat] : link_latency) {
        if (link.first >= p || link.second >= p)
            throw std::invalid_argument("delay: link latency names an unknown process");
        if (lat < 0) throw std::invalid_argument("delay: link latency must be >= 0");
    }
    if (!(skip_rate >= 0.0 && skip_rate < 1.0))
        throw std::invalid_argument("delay: skip_rate must lie in [0, 1)");
    if (skip_bound < 1) throw std::invalid_argument("delay: skip_bound must be >= 1");
    if (recv_slots < 1) throw std::invalid_argument("delay: recv_slots must be >= 1");
}

double DelaySchedule::slowdown(std::size_t s) const {
    if (slowdowns.empty()) return 1.0;
    return slowdowns[s];
}

int DelaySchedule::max_latency() const {
    switch (mode) {
        case DelayMode::zero: return 0;
        case DelayMode::fixed: return fixed_delay;
        case DelayMode::seeded_random: return max_delay;
        case DelayMode::script: {
            int m = default_latency;
            for (const auto& [link, lat] : link_latency)
                if (lat > m) m = lat;
            return m;
        }
    }
    return 0;
}

int DelaySchedule::latency(std::size_t s, std::size_t r, ChannelKind kind,
                           std::uint64_t seq) const {
    switch (mode) {
        case DelayMode::zero: return 0;
        case DelayMode::fixed: return fixed_delay;
        case DelayMode::seeded_random: {
            if (max_delay == 0) return 0;
            std::uint64_t h = hash_fields(seed, s, r, static_cast<std::uint64_t>(kind), seq);
            return static_cast<int>(h % static_cast<std::uint64_t>(max_delay + 1));
        }
        case DelayMode::script: {
            auto it = link_latency.find({s, r});
            return it != link_latency.end() ? it->second : default_latency;
        }
    }
    return 0;
}

bool DelaySchedule::wants_skip(std::size_t s, std::uint64_t pass) const {
    if (skip_rate <= 0.0) return false;
    std::uint64_t h = hash_fields(seed ^ 0xa5a5a5a5a5a5a5a5ULL, s, pass, 7, 0);
    return static_cast<double>(h >> 11) * 0x1.0p-53 < skip_rate;
}

namespace {

DelayMode mode_from_string(const std::string& s) {
    if (s == "zero") return DelayMode::zero;
    if (s == "fixed") return DelayMode::fixed;
    if (s == "seeded_random") return DelayMode::seeded_random;
    if (s == "script") return DelayMode::script;
    throw std::invalid_argument("delay: unknown mode \"" + s + "\"");
}

std::string mode_to_string(DelayMode m) {
    switch (m) {
        case DelayMode::zero: return "zero";
        case DelayMode::fixed: return "fixed";
        case DelayMode::seeded_random: return "seeded_random";
        case DelayMode::script: return "script";
    }
    return "zero";
}

}  // namespace

DelaySchedule delay_schedule_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("delay: invalid JSON: ") + e.what());
    }
    DelaySchedule d;
    d.mode = mode_from_string(j.value("mode", std::string("zero")));
    d.fixed_delay = j.value("fixed_delay", 0);
    d.max_delay = j.value("max_delay", 0);
    d.seed = j.value("seed", std::uint64_t{0});
    d.default_latency = j.value("default_latency", 0);
    if (j.contains("slowdowns")) d.slowdowns = j["slowdowns"].get<std::vector<double>>();
    if (j.contains("links"))
        for (const auto& e : j["links"]) {
            std::size_t from = e.at("from").get<std::size_t>();
            std::size_t to = e.at("to").get<std::size_t>();
            d.link_latency[{from, to}] = e.at("latency").get<int>();
        }
    d.skip_rate = j.value("skip_rate", 0.0);
    d.skip_bound = j.value("skip_bound", 10);
    d.recv_slots = j.value("recv_slots", 2);
    return d;
}

DelaySchedule delay_schedule_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("delay: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return delay_schedule_from_json(ss.str());
}

std::string delay_schedule_to_json(const DelaySchedule& d) {
    nlohmann::ordered_json j;
    j["mode"] = mode_to_string(d.mode);
    j["fixed_delay"] = d.fixed_delay;
    j["max_delay"] = d.max_delay;
    j["seed"] = d.seed;
    j["default_latency"] = d.default_latency;
    j["slowdowns"] = d.slowdowns;
    auto links = nlohmann::ordered_json::array();
    for (const auto& [link, lat] : d.link_latency)
        links.push_back({{"from", link.first}, {"to", link.second}, {"latency", lat}});
    j["links"] = links;
    j["skip_rate"] = d.skip_rate;
    j["skip_bound"] = d.skip_bound;
    j["recv_slots"] = d.recv_slots;
    return j.dump(2) + "\n";
}

}  // namespace aschwarz
