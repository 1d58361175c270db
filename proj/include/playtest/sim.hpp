#pragma once

// Game mechanics. Public operations take the state by value and return the
// successor, so callers never observe mutation; the detail:: in-place
// variants are what the planners use on their own copies.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "playtest/error.hpp"
#include "playtest/rules.hpp"
#include "playtest/state.hpp"

namespace playtest {

namespace detail {

inline std::size_t at(int i) { return static_cast<std::size_t>(i); }

inline void trace(GameState& s, TraceKind kind, std::string detail) {
    if (s.tracing) s.counters.trace.push_back({s.clock, kind, std::move(detail)});
}

inline bool object_usable(const Rules& r, const GameState& s, int object) {
    if (!s.owned_objects[at(object)]) return false;
    if (s.career) {
        if (auto level = r.unlock_level(s.career->career, object); level && s.career->level < *level) return false;
    }
    return true;
}

inline bool requirement_met(const Rules& r, const GameState& s, const CompiledRequirement& q) {
    if (q.career >= 0 && (!s.career || s.career->career != q.career || s.career->level < q.min_level)) return false;
    if (q.career < 0 && q.min_level > 0 && (!s.career || s.career->level < q.min_level)) return false;
    if (q.object >= 0 && !object_usable(r, s, q.object)) return false;
    return true;
}

inline int current_event(const GameState& s) { return s.active_event ? s.active_event->event : -1; }

// Everything about legality that time alone cannot change. `event` is the
// event treated as active (-1 for none).
inline bool action_static_ok(const Rules& r, const GameState& s, int action, int event) {
    const CompiledAction& a = r.actions[at(action)];
    if (!requirement_met(r, s, a.requirement)) return false;
    if (a.requirement.during_event && (event < 0 || !r.events[at(event)].has_action[at(action)])) return false;
    for (const auto& [item, n] : a.consumes) {
        if (s.inventory[at(item)] < n) return false;
    }
    for (const auto& [res, c] : a.costs) {
        if (c > r.resources[at(res)].capacity) return false;
    }
    return true;
}

inline bool action_legal_in(const Rules& r, const GameState& s, int action, int event) {
    if (s.locked_until > s.clock || s.cooldown_until[at(action)] > s.clock) return false;
    const CompiledAction& a = r.actions[at(action)];
    for (const auto& [res, c] : a.costs) {
        if (s.resources[at(res)] < c) return false;
    }
    return action_static_ok(r, s, action, event);
}

inline bool action_legal(const Rules& r, const GameState& s, int action) {
    return action_legal_in(r, s, action, current_event(s));
}

// Earliest clock >= s.clock at which `action` is legal if nothing but time
// passes, treating `event` as active until `deadline`.
inline std::optional<std::int64_t> unlock_time(const Rules& r, const GameState& s, int action, int event,
                                               std::int64_t deadline = std::numeric_limits<std::int64_t>::max()) {
    if (!action_static_ok(r, s, action, event)) return std::nullopt;
    const CompiledAction& a = r.actions[at(action)];
    std::int64_t t = std::max({s.clock, s.locked_until, s.cooldown_until[at(action)]});
    for (const auto& [res, c] : a.costs) {
        const std::int64_t have = s.resources[at(res)];
        if (have >= c) continue;
        const CompiledResource& spec = r.resources[at(res)];
        if (spec.regen_num <= 0) return std::nullopt;
        const __int128 need = static_cast<__int128>(c - have) * spec.regen_den - s.regen_remainder[at(res)];
        const __int128 minutes = (need + spec.regen_num - 1) / spec.regen_num;
        t = std::max(t, s.clock + static_cast<std::int64_t>(minutes));
    }
    if (a.requirement.during_event && t >= deadline) return std::nullopt;
    return t;
}

inline void regenerate(const Rules& r, GameState& s, std::int64_t minutes) {
    if (minutes <= 0) return;
    for (std::size_t i = 0; i < r.resources.size(); ++i) {
        const CompiledResource& spec = r.resources[i];
        if (spec.regen_num <= 0) continue;
        const __int128 total = static_cast<__int128>(spec.regen_num) * minutes + s.regen_remainder[i];
        const __int128 gain = total / spec.regen_den;
        s.regen_remainder[i] = static_cast<std::int64_t>(total % spec.regen_den);
        const __int128 level = std::min<__int128>(spec.capacity, s.resources[i] + gain);
        s.resources[i] = static_cast<std::int64_t>(level);
    }
}

inline void add_career_xp(const Rules& r, GameState& s, std::int64_t xp) {
    if (!s.career || xp <= 0) return;
    CareerProgress& cp = *s.career;
    const CompiledCareer& career = r.careers[at(cp.career)];
    cp.xp += xp;
    while (cp.level < career.max_level && cp.xp >= career.xp_for_level(cp.level + 1)) {
        ++cp.level;
        trace(s, TraceKind::level_up, career.id + ":" + std::to_string(cp.level));
    }
}

inline void grant(const Rules& r, GameState& s, const CompiledReward& reward) {
    for (const auto& [res, v] : reward.resources) {
        s.resources[at(res)] = std::min(r.resources[at(res)].capacity, s.resources[at(res)] + v);
    }
    for (const auto& [item, n] : reward.items) s.inventory[at(item)] += n;
    add_career_xp(r, s, reward.career_xp);
    if (s.relationship) s.relationship->xp += reward.relationship_xp;
}

// Pays every reached, unpaid step and clears the active event.
inline void close_event(const Rules& r, GameState& s) {
    const ActiveEvent ev = *s.active_event;
    const CompiledEvent& e = r.events[at(ev.event)];
    s.active_event.reset();
    int reached = 0;
    while (reached < static_cast<int>(e.steps.size()) && e.steps[at(reached)].threshold <= ev.xp) ++reached;
    for (int i = ev.steps_paid; i < reached; ++i) grant(r, s, e.steps[at(i)].reward);
    const bool completed = reached == static_cast<int>(e.steps.size());
    if (completed) {
        ++s.completions[at(ev.event)];
        if (e.kind == EventKind::relationship && s.relationship && s.relationship->category == e.owner) {
            ++s.relationship->completed;
        }
    }
    if (s.tracing) {
        const std::string owner =
            e.kind == EventKind::career ? r.careers[at(e.owner)].id : r.categories[at(e.owner)].id;
        s.counters.event_history.push_back({e.id, e.kind, owner, e.chain_index, ev.started, s.clock, ev.xp,
                                            ev.event_actions, reached, completed});
        trace(s, TraceKind::event_end, e.id + (completed ? ":completed" : ":timeout"));
    }
}

inline void advance_in_place(const Rules& r, GameState& s, std::int64_t until) {
    if (until < s.clock) {
        throw ClockRegression("cannot advance clock from " + std::to_string(s.clock) + " to " + std::to_string(until));
    }
    if (s.active_event && s.active_event->deadline <= until) {
        const std::int64_t deadline = std::max(s.active_event->deadline, s.clock);
        regenerate(r, s, deadline - s.clock);
        s.clock = deadline;
        close_event(r, s);
    }
    regenerate(r, s, until - s.clock);
    s.clock = until;
}

inline void apply_in_place(const Rules& r, GameState& s, int action) {
    if (!action_legal(r, s, action)) throw IllegalAction("action '" + r.actions[at(action)].id + "' is not legal");
    const CompiledAction& a = r.actions[at(action)];
    for (const auto& [res, c] : a.costs) s.resources[at(res)] -= c;
    for (const auto& [item, n] : a.consumes) s.inventory[at(item)] -= n;
    s.locked_until = s.clock + a.duration;
    s.cooldown_until[at(action)] = s.clock + a.duration + a.cooldown;
    if (s.counters.total_actions == 0) ++s.counters.sessions;
    ++s.counters.total_actions;
    trace(s, TraceKind::act, a.id);
    grant(r, s, a.reward);
    if (s.active_event && a.reward.event_xp > 0 && r.events[at(s.active_event->event)].has_action[at(action)]) {
        ActiveEvent& ev = *s.active_event;
        ev.xp += a.reward.event_xp;
        ++ev.event_actions;
        ++s.counters.event_actions;
        if (ev.xp >= r.events[at(ev.event)].final_threshold()) close_event(r, s);
    }
}

enum class StartStatus { ok, in_progress, busy, category_locked, chain_order, requirements };

inline StartStatus start_status(const Rules& r, const GameState& s, int event) {
    if (s.active_event) return StartStatus::in_progress;
    if (s.locked_until > s.clock) return StartStatus::busy;
    const CompiledEvent& e = r.events[at(event)];
    if (e.kind == EventKind::relationship) {
        if (s.relationship && s.relationship->category != e.owner) return StartStatus::category_locked;
        const std::int64_t done = s.relationship ? s.relationship->completed : 0;
        if (e.chain_index < 0 || e.chain_index != done) return StartStatus::chain_order;
    } else {
        if (!s.career || s.career->career != e.owner || s.career->level < e.unlock_level) {
            return StartStatus::requirements;
        }
    }
    if (!requirement_met(r, s, e.start)) return StartStatus::requirements;
    return StartStatus::ok;
}

inline void start_in_place(const Rules& r, GameState& s, int event) {
    const CompiledEvent& e = r.events[at(event)];
    switch (start_status(r, s, event)) {
        case StartStatus::ok: break;
        case StartStatus::in_progress: throw EventInProgress("event '" + r.events[at(s.active_event->event)].id + "' is in progress");
        case StartStatus::busy: throw RequirementsUnmet("Sim is busy until " + std::to_string(s.locked_until));
        case StartStatus::category_locked:
            throw CategoryLocked("relationship is locked to '" + r.categories[at(s.relationship->category)].id + "'");
        case StartStatus::chain_order: throw ChainOrderViolation("event '" + e.id + "' is not next in its chain");
        case StartStatus::requirements: throw RequirementsUnmet("requirements for event '" + e.id + "' are not met");
    }
    s.active_event = ActiveEvent{event, 0, s.clock, s.clock + e.time_limit, 0, 0};
    if (e.kind == EventKind::relationship && !s.relationship) s.relationship = RelationshipProgress{e.owner, 0, 0};
    trace(s, TraceKind::event_start, e.id);
}

// A start is only worth offering when at least one of the event's actions
// could be taken right after it.
inline bool start_useful(const Rules& r, const GameState& s, int event) {
    if (start_status(r, s, event) != StartStatus::ok) return false;
    for (int a : r.events[at(event)].actions) {
        if (action_legal_in(r, s, a, event)) return true;
    }
    return false;
}

inline bool has_moves(const Rules& r, const GameState& s) {
    for (std::size_t a = 0; a < r.actions.size(); ++a) {
        if (action_legal(r, s, static_cast<int>(a))) return true;
    }
    if (!s.active_event) {
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            if (start_useful(r, s, static_cast<int>(e))) return true;
        }
    }
    return false;
}

// Smallest time > s.clock at which an action (or a useful event start) that
// is unavailable now becomes available, ignoring the event deadline itself.
inline std::optional<std::int64_t> next_change_time(const Rules& r, const GameState& s) {
    std::optional<std::int64_t> best;
    auto consider = [&](std::optional<std::int64_t> t) {
        if (t && *t > s.clock && (!best || *t < *best)) best = t;
    };
    const int ev = current_event(s);
    const std::int64_t deadline = s.active_event ? s.active_event->deadline : std::numeric_limits<std::int64_t>::max();
    for (std::size_t a = 0; a < r.actions.size(); ++a) {
        if (!action_legal_in(r, s, static_cast<int>(a), ev)) consider(unlock_time(r, s, static_cast<int>(a), ev, deadline));
    }
    if (!s.active_event) {
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            const int ei = static_cast<int>(e);
            const StartStatus st = start_status(r, s, ei);
            if (st != StartStatus::ok && st != StartStatus::busy) continue;
            for (int a : r.events[e].actions) {
                if (st == StartStatus::ok && action_legal_in(r, s, a, ei)) continue;
                consider(unlock_time(r, s, a, ei));
            }
        }
    }
    if (s.locked_until > s.clock) consider(s.locked_until);
    return best;
}

inline std::optional<std::int64_t> next_availability(const Rules& r, const GameState& s) {
    if (has_moves(r, s)) return s.clock;
    GameState cur = s;
    cur.tracing = false;
    // Each iteration either returns or strictly advances the clock; the bound
    // only guards against malformed inputs.
    for (int guard = 0; guard < 4096; ++guard) {
        const auto t = next_change_time(r, cur);
        if (cur.active_event && (!t || cur.active_event->deadline <= *t)) {
            const std::int64_t deadline = cur.active_event->deadline;
            advance_in_place(r, cur, deadline);
            if (has_moves(r, cur)) return deadline;
            continue;
        }
        if (!t) return std::nullopt;
        advance_in_place(r, cur, *t);
        if (has_moves(r, cur)) return *t;
    }
    return std::nullopt;
}

inline void close_session_to(const Rules& r, GameState& s, std::int64_t until) {
    s.counters.wait_intervals.push_back(until - s.clock);
    ++s.counters.sessions;
    trace(s, TraceKind::session_end, std::to_string(until - s.clock));
    advance_in_place(r, s, until);
}

}  // namespace detail

/// Fresh state for a scenario: clock 0, initial resources, optional career,
/// relationship category and granted objects.
inline GameState initial_state(const Rules& r, const ScenarioOverrides& scenario, std::uint64_t seed) {
    GameState s;
    s.resources.resize(r.resources.size());
    for (std::size_t i = 0; i < r.resources.size(); ++i) s.resources[i] = r.resources[i].initial;
    for (const auto& [id, v] : scenario.initial_resources) {
        auto i = r.resource_index(id);
        if (!i) throw InvalidArgument("scenario sets unknown resource '" + id + "'");
        if (v < 0 || v > r.resources[detail::at(*i)].capacity) {
            throw InvalidArgument("scenario value for '" + id + "' is outside 0..capacity");
        }
        s.resources[detail::at(*i)] = v;
    }
    s.regen_remainder.assign(r.resources.size(), 0);
    s.cooldown_until.assign(r.actions.size(), 0);
    s.inventory.assign(r.items.size(), 0);
    s.owned_objects.assign(r.objects.size(), 0);
    s.completions.assign(r.events.size(), 0);
    s.rng_seed = seed;

    if (scenario.career) s.career = CareerProgress{r.require_career(*scenario.career), 1, 0};
    if (scenario.relationship_category) {
        auto k = r.category_index(*scenario.relationship_category);
        if (!k) throw UnknownCategory("unknown relationship category '" + *scenario.relationship_category + "'");
        s.relationship = RelationshipProgress{*k, 0, 0};
    }
    if (scenario.grant_objects && s.career) {
        for (const auto& u : r.careers[detail::at(s.career->career)].unlocks) s.owned_objects[detail::at(u.object)] = 1;
    }
    for (const auto& id : scenario.objects) {
        auto o = r.object_index(id);
        if (!o) throw UnknownObject("unknown object '" + id + "'");
        s.owned_objects[detail::at(*o)] = 1;
    }
    return s;
}

/// Legal action ids in lexicographic order.
inline std::vector<std::string> legal_actions(const Rules& r, const GameState& s) {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < r.actions.size(); ++a) {
        if (detail::action_legal(r, s, static_cast<int>(a))) out.push_back(r.actions[a].id);
    }
    return out;
}

/// Events that can be started now and would allow at least one action.
inline std::vector<std::string> startable_events(const Rules& r, const GameState& s) {
    std::vector<std::string> out;
    for (std::size_t e = 0; e < r.events.size(); ++e) {
        if (detail::start_useful(r, s, static_cast<int>(e))) out.push_back(r.events[e].id);
    }
    return out;
}

inline GameState apply_action(const Rules& r, GameState s, std::string_view action_id) {
    auto a = r.action_index(action_id);
    if (!a) throw IllegalAction("unknown action '" + std::string(action_id) + "'");
    detail::apply_in_place(r, s, *a);
    return s;
}

inline GameState advance_time(const Rules& r, GameState s, std::int64_t until) {
    detail::advance_in_place(r, s, until);
    return s;
}

inline GameState start_event(const Rules& r, GameState s, std::string_view event_id) {
    detail::start_in_place(r, s, r.require_event(event_id));
    return s;
}

inline std::optional<std::int64_t> next_availability(const Rules& r, const GameState& s) {
    return detail::next_availability(r, s);
}

/// Ends the current session: records the gap until the next availability and
/// fast-forwards to it.
inline GameState close_session_if_idle(const Rules& r, GameState s) {
    if (detail::has_moves(r, s)) throw InvalidArgument("close_session_if_idle: actions are still available");
    const auto t = detail::next_availability(r, s);
    if (!t) throw Deadlock("no action can ever become legal");
    detail::close_session_to(r, s, *t);
    return s;
}

// ---------------------------------------------------------------------------
// Move generation shared by planners and oracles
// ---------------------------------------------------------------------------

enum class EdgeKind : std::uint8_t { act, start_event, wait };
enum class WaitKind : std::uint8_t { session, unlock, deadline };

inline std::string_view to_string(WaitKind k) {
    switch (k) {
        case WaitKind::session: return "session";
        case WaitKind::unlock: return "unlock";
        case WaitKind::deadline: return "deadline";
    }
    return "?";
}

struct Edge {
    EdgeKind kind = EdgeKind::act;
    int index = -1;            // action or event index
    std::int64_t until = 0;    // wait target
    WaitKind wait = WaitKind::unlock;

    bool operator==(const Edge&) const = default;
};

/// Outgoing edges of a decision point: legal actions, useful event starts,
/// then waits. When nothing is available the only edge is the session-ending
/// wait to the next availability; otherwise one wait to the next time an
/// unavailable action unlocks and, during an event, one wait to its deadline.
inline void enumerate_edges(const Rules& r, const GameState& s, std::vector<Edge>& out) {
    out.clear();
    if (s.locked_until > s.clock) {
        out.push_back({EdgeKind::wait, -1, s.locked_until, WaitKind::unlock});
        return;
    }
    for (std::size_t a = 0; a < r.actions.size(); ++a) {
        if (detail::action_legal(r, s, static_cast<int>(a))) out.push_back({EdgeKind::act, static_cast<int>(a), 0, {}});
    }
    if (!s.active_event) {
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            if (detail::start_useful(r, s, static_cast<int>(e))) {
                out.push_back({EdgeKind::start_event, static_cast<int>(e), 0, {}});
            }
        }
    }
    if (out.empty()) {
        if (auto t = detail::next_availability(r, s)) out.push_back({EdgeKind::wait, -1, *t, WaitKind::session});
        return;
    }
    const auto t = detail::next_change_time(r, s);
    if (s.active_event) {
        const std::int64_t deadline = s.active_event->deadline;
        if (t && *t < deadline) out.push_back({EdgeKind::wait, -1, *t, WaitKind::unlock});
        out.push_back({EdgeKind::wait, -1, deadline, WaitKind::deadline});
    } else if (t) {
        out.push_back({EdgeKind::wait, -1, *t, WaitKind::unlock});
    }
}

inline std::vector<Edge> enumerate_edges(const Rules& r, const GameState& s) {
    std::vector<Edge> out;
    enumerate_edges(r, s, out);
    return out;
}

namespace detail {

inline void follow_in_place(const Rules& r, GameState& s, const Edge& e) {
    switch (e.kind) {
        case EdgeKind::act:
            apply_in_place(r, s, e.index);
            advance_in_place(r, s, s.locked_until);
            break;
        case EdgeKind::start_event:
            start_in_place(r, s, e.index);
            break;
        case EdgeKind::wait:
            trace(s, TraceKind::wait, std::string(to_string(e.wait)));
            if (e.wait == WaitKind::session) {
                close_session_to(r, s, e.until);
            } else {
                advance_in_place(r, s, e.until);
            }
            break;
    }
}

}  // namespace detail

/// Successor along an edge. Acting also fast-forwards to the end of the
/// action's lock, so every decision point finds the Sim free.
inline GameState follow_edge(const Rules& r, GameState s, const Edge& e) {
    detail::follow_in_place(r, s, e);
    return s;
}

// ---------------------------------------------------------------------------
// State identity
// ---------------------------------------------------------------------------

/// Canonical encoding of everything that affects future dynamics (counters
/// and trace excluded). Times are relative to the clock, so two states that
/// differ only by when they happen share a key. Expired locks and cooldowns
/// collapse to zero.
inline void dynamics_key(const GameState& s, std::vector<std::int64_t>& key) {
    key.clear();
    key.push_back(std::max<std::int64_t>(0, s.locked_until - s.clock));
    key.insert(key.end(), s.resources.begin(), s.resources.end());
    key.insert(key.end(), s.regen_remainder.begin(), s.regen_remainder.end());
    for (auto c : s.cooldown_until) key.push_back(std::max<std::int64_t>(0, c - s.clock));
    if (s.career) {
        key.insert(key.end(), {s.career->career, s.career->level, s.career->xp});
    } else {
        key.push_back(-1);
    }
    if (s.relationship) {
        key.insert(key.end(), {s.relationship->category, s.relationship->completed, s.relationship->xp});
    } else {
        key.push_back(-1);
    }
    if (s.active_event) {
        const auto& e = *s.active_event;
        key.insert(key.end(), {e.event, e.xp, e.deadline - s.clock, e.steps_paid});
    } else {
        key.push_back(-1);
    }
    key.insert(key.end(), s.inventory.begin(), s.inventory.end());
    for (char o : s.owned_objects) key.push_back(o);
    key.insert(key.end(), s.completions.begin(), s.completions.end());
}

inline std::uint64_t hash_key(const std::vector<std::int64_t>& key) {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ key.size();
    for (std::int64_t v : key) {
        std::uint64_t x = static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        h ^= x ^ (x >> 31);
    }
    return h;
}

/// Hex digest of the dynamics key plus the clock and headline counters.
inline std::string state_digest(const GameState& s) {
    std::vector<std::int64_t> key;
    dynamics_key(s, key);
    key.insert(key.end(), {s.clock, s.counters.total_actions, s.counters.event_actions, s.counters.sessions});
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = hash_key(key);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    return out;
}

}  // namespace playtest
