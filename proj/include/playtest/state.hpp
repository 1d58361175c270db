#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "playtest/tuning.hpp"

namespace playtest {

enum class TraceKind { act, wait, event_start, event_end, level_up, session_end };

inline std::string_view to_string(TraceKind k) {
    switch (k) {
        case TraceKind::act: return "act";
        case TraceKind::wait: return "wait";
        case TraceKind::event_start: return "event_start";
        case TraceKind::event_end: return "event_end";
        case TraceKind::level_up: return "level_up";
        case TraceKind::session_end: return "session_end";
    }
    return "?";
}

struct TraceEntry {
    std::int64_t clock = 0;
    TraceKind kind = TraceKind::act;
    std::string detail;

    bool operator==(const TraceEntry&) const = default;
};

/// One closed event, as seen by the experiment harness.
struct EventRecord {
    std::string event_id;
    EventKind kind = EventKind::career;
    std::string owner_id;
    int chain_index = -1;
    std::int64_t started = 0;
    std::int64_t ended = 0;
    std::int64_t accrued_xp = 0;
    std::int64_t event_actions = 0;
    int steps_reached = 0;
    bool completed = false;

    bool operator==(const EventRecord&) const = default;
};

struct Counters {
    std::int64_t total_actions = 0;
    std::int64_t event_actions = 0;
    std::int64_t sessions = 0;
    std::vector<std::int64_t> wait_intervals;
    std::vector<TraceEntry> trace;
    std::vector<EventRecord> event_history;

    bool operator==(const Counters&) const = default;
};

struct CareerProgress {
    int career = -1;
    std::int64_t level = 1;
    std::int64_t xp = 0;

    bool operator==(const CareerProgress&) const = default;
};

struct RelationshipProgress {
    int category = -1;
    std::int64_t completed = 0;
    std::int64_t xp = 0;

    bool operator==(const RelationshipProgress&) const = default;
};

struct ActiveEvent {
    int event = -1;
    std::int64_t xp = 0;
    std::int64_t started = 0;
    std::int64_t deadline = 0;
    int steps_paid = 0;
    std::int64_t event_actions = 0;

    bool operator==(const ActiveEvent&) const = default;
};

/// Complete state of one avatar. Per-entity vectors are indexed like the
/// corresponding Rules tables.
struct GameState {
    std::int64_t clock = 0;
    std::vector<std::int64_t> resources;
    // Fractional regeneration carried between advances, in 1/den units.
    std::vector<std::int64_t> regen_remainder;
    std::int64_t locked_until = 0;
    std::vector<std::int64_t> cooldown_until;
    std::optional<CareerProgress> career;
    std::optional<RelationshipProgress> relationship;
    std::optional<ActiveEvent> active_event;
    std::vector<std::int64_t> inventory;
    std::vector<char> owned_objects;
    std::vector<std::int32_t> completions;  // completed runs per event
    Counters counters;
    std::uint64_t rng_seed = 0;
    // When false, trace and event history are not recorded (search nodes).
    bool tracing = true;

    bool operator==(const GameState&) const = default;
};

struct ScenarioOverrides {
    std::optional<std::string> career;
    std::optional<std::string> relationship_category;
    // Grant every object unlocked by the assigned career.
    bool grant_objects = false;
    // Explicit objects to grant.
    std::vector<std::string> objects;
    Quantities initial_resources;

    bool operator==(const ScenarioOverrides&) const = default;
};

}  // namespace playtest
