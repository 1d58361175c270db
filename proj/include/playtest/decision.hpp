#pragma once

#include <cstdint>
#include <string>

#include "playtest/rules.hpp"
#include "playtest/sim.hpp"

namespace playtest {

/// A planner's choice for the current decision point. Everything except
/// stop carries the edge to follow.
struct Decision {
    enum class Kind { act, start_event, wait, stop };

    Kind kind = Kind::stop;
    Edge edge;
    std::string id;          // action or event id
    std::int64_t until = 0;  // wait target
    std::string reason;      // stop reason or wait kind

    bool operator==(const Decision&) const = default;
};

inline Decision stop_decision(std::string reason) {
    Decision d;
    d.reason = std::move(reason);
    return d;
}

inline Decision decision_for(const Rules& r, const Edge& e) {
    Decision d;
    d.edge = e;
    switch (e.kind) {
        case EdgeKind::act:
            d.kind = Decision::Kind::act;
            d.id = r.actions[static_cast<std::size_t>(e.index)].id;
            break;
        case EdgeKind::start_event:
            d.kind = Decision::Kind::start_event;
            d.id = r.events[static_cast<std::size_t>(e.index)].id;
            break;
        case EdgeKind::wait:
            d.kind = Decision::Kind::wait;
            d.until = e.until;
            d.reason = std::string(to_string(e.wait));
            break;
    }
    return d;
}

inline std::string describe(const Decision& d) {
    switch (d.kind) {
        case Decision::Kind::act: return "act(" + d.id + ")";
        case Decision::Kind::start_event: return "start_event(" + d.id + ")";
        case Decision::Kind::wait: return "wait(" + std::to_string(d.until) + ", " + d.reason + ")";
        case Decision::Kind::stop: return "stop(" + d.reason + ")";
    }
    return "?";
}

}  // namespace playtest
