#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "playtest/astar.hpp"
#include "playtest/decision.hpp"
#include "playtest/heuristic.hpp"
#include "playtest/rng.hpp"
#include "playtest/rules.hpp"
#include "playtest/sim.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

/// Outcome of one episode.
struct TrialRecord {
    std::uint64_t seed = 0;
    bool goal_reached = false;
    std::string stop_reason;
    Counters counters;
    std::int64_t final_clock = 0;
    std::string final_digest;
    std::optional<std::string> relationship_category;
    std::int64_t career_level = 0;
    std::int64_t decisions = 0;
    std::int64_t max_expansions = 0;
    // Wall-clock figures; never written to deterministic outputs.
    double max_decision_seconds = 0.0;
    double total_seconds = 0.0;
};

/// Runs decide/follow until the goal holds or the planner stops. A planner
/// provides `Decision decide(const GameState&, Rng&, SearchStats&)`.
template <class Planner>
TrialRecord run_episode(const Rules& r, const ScenarioOverrides& scenario, std::uint64_t seed, const Planner& planner,
                        const CompiledGoal& goal) {
    using clock = std::chrono::steady_clock;
    TrialRecord rec;
    rec.seed = seed;
    GameState s = initial_state(r, scenario, seed);
    Rng rng(seed);
    const auto episode_start = clock::now();
    while (true) {
        if (goal_satisfied(goal, s)) {
            rec.goal_reached = true;
            rec.stop_reason = "goal reached";
            break;
        }
        SearchStats stats;
        const auto t0 = clock::now();
        const Decision d = planner.decide(s, rng, stats);
        const double dt = std::chrono::duration<double>(clock::now() - t0).count();
        rec.max_decision_seconds = std::max(rec.max_decision_seconds, dt);
        rec.max_expansions = std::max(rec.max_expansions, stats.expansions);
        if (d.kind == Decision::Kind::stop) {
            rec.stop_reason = d.reason;
            break;
        }
        detail::follow_in_place(r, s, d.edge);
        ++rec.decisions;
    }
    rec.total_seconds = std::chrono::duration<double>(clock::now() - episode_start).count();
    rec.final_clock = s.clock;
    rec.final_digest = state_digest(s);
    if (s.relationship) rec.relationship_category = r.categories[static_cast<std::size_t>(s.relationship->category)].id;
    if (s.career) rec.career_level = s.career->level;
    rec.counters = std::move(s.counters);
    return rec;
}

template <class Planner>
TrialRecord run_episode(const Rules& r, const ScenarioOverrides& scenario, std::uint64_t seed, const Planner& planner,
                        const GoalSpec& goal) {
    return run_episode(r, scenario, seed, planner, compile_goal(r, goal));
}

/// One `{clock, kind, detail}` JSON object per line.
inline void write_trace_ndjson(std::ostream& out, const std::vector<TraceEntry>& trace) {
    for (const auto& e : trace) {
        ordered_json j;
        j["clock"] = e.clock;
        j["kind"] = to_string(e.kind);
        j["detail"] = e.detail;
        out << j.dump() << '\n';
    }
}

}  // namespace playtest
