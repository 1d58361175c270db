#pragma once

// Shared helpers for the test binaries: fixture loading, small hand-built
// configs, and an exhaustive shortest-path oracle.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "playtest/heuristic.hpp"
#include "playtest/rng.hpp"
#include "playtest/rules.hpp"
#include "playtest/sim.hpp"
#include "playtest/tuning_analysis.hpp"

namespace playtest::testing {

inline std::string fixture_path(const std::string& name) { return std::string(PLAYTEST_FIXTURES) + "/" + name; }

inline TuningConfig fixture(const std::string& name) { return load_tuning(fixture_path(name)); }

inline RulesPtr fixture_rules(const std::string& name) { return make_rules(fixture(name)); }

inline ScenarioOverrides with_career(std::string career) {
    ScenarioOverrides s;
    s.career = std::move(career);
    return s;
}

// --- builders for tiny configs ---------------------------------------------

inline ResourceSpec resource(std::string id, std::int64_t capacity, std::int64_t num, std::int64_t den,
                             std::int64_t initial) {
    return {std::move(id), capacity, {num, den}, initial};
}

inline ActionSpec action(std::string id, std::int64_t duration = 1, std::int64_t cooldown = 0) {
    ActionSpec a;
    a.id = std::move(id);
    a.duration = duration;
    a.cooldown = cooldown;
    return a;
}

inline CareerSpec career(std::string id, std::vector<std::int64_t> xp_per_level) {
    CareerSpec c;
    c.id = std::move(id);
    c.max_level = static_cast<std::int64_t>(xp_per_level.size());
    c.xp_per_level = std::move(xp_per_level);
    return c;
}

inline EventSpec event(std::string id, EventKind kind, std::string owner, std::int64_t time_limit,
                       std::vector<std::string> actions, std::vector<std::pair<std::int64_t, std::int64_t>> steps) {
    EventSpec e;
    e.id = std::move(id);
    e.kind = kind;
    e.owner_id = std::move(owner);
    e.time_limit = time_limit;
    e.action_ids = std::move(actions);
    for (auto [threshold, career_xp] : steps) {
        EventStep s;
        s.xp_threshold = threshold;
        s.reward.career_xp = career_xp;
        e.steps.push_back(s);
    }
    return e;
}

inline TuningConfig config(std::string build_id) {
    TuningConfig c;
    c.build_id = std::move(build_id);
    return c;
}

// One career "job" with a single energy-costing action per listed xp value.
inline TuningConfig simple_career(std::vector<std::int64_t> action_xp, std::vector<std::int64_t> levels,
                                  std::int64_t capacity = 10, std::int64_t regen_den = 1) {
    TuningConfig c = config("simple");
    c.resources.push_back(resource("energy", capacity, 1, regen_den, capacity));
    for (std::size_t i = 0; i < action_xp.size(); ++i) {
        ActionSpec a = action("act" + std::to_string(i));
        a.costs["energy"] = 1;
        a.rewards.career_xp = action_xp[i];
        a.requirements.career = "job";
        c.actions.push_back(a);
    }
    c.careers.push_back(career("job", std::move(levels)));
    return c;
}

// --- exhaustive oracle -------------------------------------------------------

// State identity for the oracle, written independently of the planner's key:
// everything that shapes future moves, with times taken relative to the clock.
inline std::string oracle_key(const GameState& s) {
    std::string k;
    auto put = [&](std::int64_t v) {
        k += std::to_string(v);
        k += ',';
    };
    for (auto v : s.resources) put(v);
    for (auto v : s.regen_remainder) put(v);
    put(std::max<std::int64_t>(0, s.locked_until - s.clock));
    for (auto v : s.cooldown_until) put(std::max<std::int64_t>(0, v - s.clock));
    k += '|';
    if (s.career) {
        put(s.career->career);
        put(s.career->level);
        put(s.career->xp);
    }
    k += '|';
    if (s.relationship) {
        put(s.relationship->category);
        put(s.relationship->completed);
        put(s.relationship->xp);
    }
    k += '|';
    if (s.active_event) {
        put(s.active_event->event);
        put(s.active_event->xp);
        put(s.active_event->deadline - s.clock);
        put(s.active_event->steps_paid);
    }
    k += '|';
    for (auto v : s.inventory) put(v);
    for (char o : s.owned_objects) put(o);
    for (auto v : s.completions) put(v);
    return k;
}

struct OracleResult {
    std::optional<std::int64_t> min_actions;  // absent when no goal state is reachable
    std::size_t states = 0;                   // distinct non-goal states reached
    bool capped = false;                      // exploration hit the state cap
};

// 0-1 BFS over the simulator's edge relation (acts cost 1, starts and waits
// cost 0). Goal states are not expanded. Children outside the goal's limits
// are dropped, as the planner does.
inline OracleResult bfs_oracle(const Rules& r, GameState start, const CompiledGoal& goal, std::size_t cap = 10000) {
    OracleResult out;
    start.tracing = false;
    struct Item {
        GameState state;
        std::int64_t g;
    };
    std::deque<Item> queue;
    std::unordered_map<std::string, std::int64_t> dist;
    dist.emplace(oracle_key(start), 0);
    queue.push_back({start, 0});
    std::vector<Edge> edges;
    while (!queue.empty()) {
        Item cur = std::move(queue.front());
        queue.pop_front();
        if (dist[oracle_key(cur.state)] < cur.g) continue;
        if (goal_satisfied(goal, cur.state)) {
            if (!out.min_actions || cur.g < *out.min_actions) out.min_actions = cur.g;
            continue;
        }
        if (++out.states > cap) {
            out.capped = true;
            return out;
        }
        enumerate_edges(r, cur.state, edges);
        for (const Edge& e : edges) {
            GameState next = follow_edge(r, cur.state, e);
            if (!within_limits(goal, next)) continue;
            const std::int64_t g = cur.g + (e.kind == EdgeKind::act ? 1 : 0);
            const std::string key = oracle_key(next);
            auto it = dist.find(key);
            if (it != dist.end() && it->second <= g) continue;
            dist[key] = g;
            if (e.kind == EdgeKind::act) {
                queue.push_back({std::move(next), g});
            } else {
                queue.push_front({std::move(next), g});
            }
        }
    }
    return out;
}

// Small seeded career fixture: one energy pool, a direct XP action, a
// crafting pair and a short career event. Limits keep the state space finite.
inline TuningConfig random_tiny_fixture(std::uint64_t seed) {
    Rng rng(seed);
    auto pick = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    };
    TuningConfig c = config("tiny-" + std::to_string(seed));
    const std::int64_t cap = pick(2, 5);
    c.resources.push_back(resource("energy", cap, 1, pick(1, 4), pick(0, cap)));

    ActionSpec work = action("work", pick(0, 2), pick(0, 3));
    work.costs["energy"] = pick(1, 2);
    work.rewards.career_xp = 10;
    work.rewards.event_xp = 10;
    work.requirements.career = "job";
    c.actions.push_back(work);

    ActionSpec make = action("make", pick(0, 1), pick(0, 2));
    make.costs["energy"] = 1;
    make.rewards.items["part"] = 1;
    make.requirements.career = "job";
    c.actions.push_back(make);

    ActionSpec sell = action("sell", pick(1, 2), 0);
    sell.consumes_items["part"] = pick(1, 2);
    sell.rewards.career_xp = 10 * pick(1, 3);
    sell.requirements.career = "job";
    c.actions.push_back(sell);

    const std::int64_t first = 10 * pick(3, 5);
    CareerSpec job = career("job", {first, first + 10 * pick(2, 5), first + 120});
    job.craft_items = {"part"};
    c.events.push_back(event("shift", EventKind::career, "job", pick(3, 12), {"work"}, {{10 * pick(1, 2), 10 * pick(0, 2)}}));
    job.events_by_level[1] = {"shift"};
    c.careers.push_back(job);
    return c;
}

inline GoalSpec tiny_goal(std::int64_t level = 3) {
    GoalSpec g = career_goal("job", level);
    g.max_actions = 20;
    return g;
}

}  // namespace playtest::testing
