#pragma once

// Bounded best-first search run before every decision (receding horizon).
// Only the first edge of the best path found is committed.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "playtest/decision.hpp"
#include "playtest/heuristic.hpp"
#include "playtest/rng.hpp"
#include "playtest/rules.hpp"
#include "playtest/sim.hpp"

namespace playtest {

inline constexpr int kDefaultNodeBudget = 2000;

struct SearchStats {
    std::int64_t expansions = 0;
    std::int64_t generated = 0;
    bool goal_found = false;
};

namespace detail {

struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept { return static_cast<std::size_t>(hash_key(k)); }
};

struct SearchNode {
    GameState state;
    std::vector<std::int64_t> key;
    int first = -1;  // index of the root edge this node descends from
    std::int64_t g = 0;
    double f = 0.0;
    std::int64_t elapsed = 0;
};

}  // namespace detail

/// Picks the next move from `root`. Frontier ties on (f, elapsed minutes) are
/// broken by a uniform draw from `rng`.
inline Decision astar_decide(const Rules& r, const GameState& root, const Heuristic& h, int node_budget, Rng& rng,
                             SearchStats* stats_out = nullptr) {
    if (node_budget < 1) throw InvalidArgument("node budget must be at least 1");
    SearchStats stats;
    auto finish = [&](Decision d) {
        if (stats_out) *stats_out = stats;
        return d;
    };
    const CompiledGoal& goal = h.goal();
    if (goal_satisfied(goal, root)) return finish(stop_decision("goal reached"));
    if (auto why = limit_reason(goal, root); !why.empty()) return finish(stop_decision(why));

    std::vector<Edge> root_edges;
    enumerate_edges(r, root, root_edges);
    if (root_edges.empty()) return finish(stop_decision("deadlock"));
    if (root_edges.size() == 1) return finish(decision_for(r, root_edges.front()));

    std::vector<detail::SearchNode> nodes;
    nodes.reserve(static_cast<std::size_t>(node_budget) * 4);
    std::map<std::pair<double, std::int64_t>, std::vector<int>> open;
    std::unordered_map<std::vector<std::int64_t>, std::int64_t, detail::KeyHash> best_g;

    {
        detail::SearchNode n;
        n.state = root;
        n.state.tracing = false;
        n.state.counters.trace.clear();
        n.state.counters.event_history.clear();
        n.state.counters.wait_intervals.clear();
        dynamics_key(n.state, n.key);
        n.f = h(n.state);
        best_g.emplace(n.key, 0);
        open[{n.f, 0}].push_back(0);
        nodes.push_back(std::move(n));
    }

    auto stale = [&](const detail::SearchNode& n) { return best_g.find(n.key)->second < n.g; };

    std::vector<Edge> edges;
    std::vector<std::int64_t> key;
    while (!open.empty() && stats.expansions < node_budget) {
        auto bucket_it = open.begin();
        auto& bucket = bucket_it->second;
        const std::size_t pick = static_cast<std::size_t>(rng.uniform_index(bucket.size()));
        const int id = bucket[pick];
        bucket[pick] = bucket.back();
        bucket.pop_back();
        if (bucket.empty()) open.erase(bucket_it);
        if (stale(nodes[static_cast<std::size_t>(id)])) continue;

        ++stats.expansions;
        if (goal_satisfied(goal, nodes[static_cast<std::size_t>(id)].state)) {
            stats.goal_found = true;
            return finish(decision_for(r, root_edges[static_cast<std::size_t>(nodes[static_cast<std::size_t>(id)].first)]));
        }
        enumerate_edges(r, nodes[static_cast<std::size_t>(id)].state, edges);
        for (std::size_t ei = 0; ei < edges.size(); ++ei) {
            const detail::SearchNode& parent = nodes[static_cast<std::size_t>(id)];
            GameState child = parent.state;
            detail::follow_in_place(r, child, edges[ei]);
            if (!within_limits(goal, child)) continue;
            const std::int64_t g = parent.g + (edges[ei].kind == EdgeKind::act ? 1 : 0);
            dynamics_key(child, key);
            auto [it, fresh] = best_g.try_emplace(key, g);
            if (!fresh) {
                if (it->second <= g) continue;
                it->second = g;
            }
            ++stats.generated;
            detail::SearchNode n;
            n.first = parent.first < 0 ? static_cast<int>(ei) : parent.first;
            n.g = g;
            n.elapsed = child.clock - root.clock;
            n.f = static_cast<double>(g) + h(child);
            n.state = std::move(child);
            n.key = key;
            open[{n.f, n.elapsed}].push_back(static_cast<int>(nodes.size()));
            nodes.push_back(std::move(n));
        }
    }

    if (open.empty()) return finish(stop_decision("goal unreachable within limits"));

    // Best frontier node: minimal f, then g, then elapsed time, then random.
    std::vector<int> ties;
    const detail::SearchNode* best = nullptr;
    for (const auto& [_, bucket] : open) {
        for (int id : bucket) {
            const auto& n = nodes[static_cast<std::size_t>(id)];
            if (stale(n)) continue;
            if (best) {
                const auto lhs = std::tie(n.f, n.g, n.elapsed);
                const auto rhs = std::tie(best->f, best->g, best->elapsed);
                if (rhs < lhs) continue;
                if (lhs < rhs) ties.clear();
            }
            best = &n;
            ties.push_back(id);
        }
    }
    if (ties.empty()) return finish(stop_decision("goal unreachable within limits"));
    const int chosen = ties[static_cast<std::size_t>(rng.uniform_index(ties.size()))];
    return finish(decision_for(r, root_edges[static_cast<std::size_t>(nodes[static_cast<std::size_t>(chosen)].first)]));
}

inline Decision astar_decide(const Rules& r, const GameState& root, const HeuristicSpec& spec, const GoalSpec& goal,
                             int node_budget, Rng& rng, SearchStats* stats = nullptr) {
    return astar_decide(r, root, Heuristic(r, spec, goal), node_budget, rng, stats);
}

class AStarPlanner {
public:
    AStarPlanner(const Rules& r, const HeuristicSpec& spec, const GoalSpec& goal, int node_budget = kDefaultNodeBudget)
        : rules_(&r), heuristic_(r, spec, goal), budget_(node_budget) {}

    Decision decide(const GameState& s, Rng& rng, SearchStats& stats) const {
        return astar_decide(*rules_, s, heuristic_, budget_, rng, &stats);
    }

    const CompiledGoal& goal() const { return heuristic_.goal(); }

private:
    const Rules* rules_;
    Heuristic heuristic_;
    int budget_;
};

}  // namespace playtest
