#pragma once

// Goals and the weighted "remaining quantity / best yield" heuristic used by
// the A* planner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "playtest/error.hpp"
#include "playtest/rules.hpp"
#include "playtest/state.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

enum class GoalKind { career_level_reached, relationship_chain_done, any_relationship_chain_done, event_completed };

inline std::string_view to_string(GoalKind k) {
    switch (k) {
        case GoalKind::career_level_reached: return "career_level_reached";
        case GoalKind::relationship_chain_done: return "relationship_chain_done";
        case GoalKind::any_relationship_chain_done: return "any_relationship_chain_done";
        case GoalKind::event_completed: return "event_completed";
    }
    return "?";
}

struct GoalSpec {
    GoalKind kind = GoalKind::career_level_reached;
    std::string target;       // career, category or event id; empty for any_relationship_chain_done
    std::int64_t amount = 1;  // level or number of events
    std::int64_t max_minutes = 1'000'000;
    std::int64_t max_actions = 100'000;

    bool operator==(const GoalSpec&) const = default;
};

inline GoalSpec career_goal(std::string career, std::int64_t level) {
    GoalSpec g;
    g.kind = GoalKind::career_level_reached;
    g.target = std::move(career);
    g.amount = level;
    return g;
}

inline constexpr std::string_view kHeuristicTerms[] = {
    "career_xp", "career_level", "career_event_complete", "event_xp",
    "relationship_xp", "relationship_event_complete", "goal_pending",
};
inline constexpr std::string_view kCraftedItemPrefix = "crafted_item:";

struct HeuristicSpec {
    std::map<std::string, double> weights;
    // Per-term scale multipliers; missing terms scale by 1.
    std::map<std::string, double> normalization;

    bool operator==(const HeuristicSpec&) const = default;
};

/// Goal with ids resolved to indices.
struct CompiledGoal {
    GoalKind kind = GoalKind::career_level_reached;
    int index = -1;
    std::int64_t amount = 1;
    std::int64_t max_minutes = 0;
    std::int64_t max_actions = 0;
};

inline CompiledGoal compile_goal(const Rules& r, const GoalSpec& g) {
    if (g.max_minutes <= 0 || g.max_actions <= 0) throw InvalidArgument("goal limits must be positive");
    CompiledGoal c{g.kind, -1, g.amount, g.max_minutes, g.max_actions};
    switch (g.kind) {
        case GoalKind::career_level_reached: {
            c.index = r.require_career(g.target);
            const auto& career = r.careers[static_cast<std::size_t>(c.index)];
            if (g.amount < 1) throw InvalidArgument("target level must be at least 1");
            if (g.amount > career.max_level) {
                throw TargetAboveCap("target level " + std::to_string(g.amount) + " exceeds max level " +
                                     std::to_string(career.max_level) + " of '" + g.target + "'");
            }
            break;
        }
        case GoalKind::relationship_chain_done: {
            auto k = r.category_index(g.target);
            if (!k) throw UnknownCategory("unknown relationship category '" + g.target + "'");
            c.index = *k;
            if (g.amount < 1 || g.amount > static_cast<std::int64_t>(r.categories[static_cast<std::size_t>(*k)].chain.size())) {
                throw InvalidArgument("chain goal must be between 1 and the chain length");
            }
            break;
        }
        case GoalKind::any_relationship_chain_done:
            if (g.amount < 1) throw InvalidArgument("chain goal must be at least 1 event");
            break;
        case GoalKind::event_completed: c.index = r.require_event(g.target); break;
    }
    return c;
}

inline bool goal_satisfied(const CompiledGoal& g, const GameState& s) {
    switch (g.kind) {
        case GoalKind::career_level_reached: return s.career && s.career->career == g.index && s.career->level >= g.amount;
        case GoalKind::relationship_chain_done:
            return s.relationship && s.relationship->category == g.index && s.relationship->completed >= g.amount;
        case GoalKind::any_relationship_chain_done: return s.relationship && s.relationship->completed >= g.amount;
        case GoalKind::event_completed: return s.completions[static_cast<std::size_t>(g.index)] > 0;
    }
    return false;
}

inline bool goal_satisfied(const Rules& r, const GameState& s, const GoalSpec& g) {
    return goal_satisfied(compile_goal(r, g), s);
}

/// Non-empty reason when the state sits at a hard limit.
inline std::string limit_reason(const CompiledGoal& g, const GameState& s) {
    if (s.counters.total_actions >= g.max_actions) return "action limit reached";
    if (s.clock >= g.max_minutes) return "time limit reached";
    return {};
}

inline bool within_limits(const CompiledGoal& g, const GameState& s) {
    return s.clock <= g.max_minutes && s.counters.total_actions <= g.max_actions;
}

class Heuristic {
public:
    Heuristic(const Rules& rules, const HeuristicSpec& spec, const GoalSpec& goal)
        : rules_(&rules), goal_(compile_goal(rules, goal)) {
        bool any = false;
        for (const auto& [term, w] : spec.weights) {
            if (!std::isfinite(w)) throw InvalidArgument("heuristic weight for '" + term + "' is not finite");
            check_term(term);
            if (w != 0.0) any = true;
        }
        if (!any) throw InvalidArgument("heuristic needs at least one non-zero weight");
        for (const auto& [term, scale] : spec.normalization) {
            check_term(term);
            if (!std::isfinite(scale) || scale <= 0.0) throw InvalidArgument("normalization for '" + term + "' must be positive");
        }
        auto weight = [&](const std::string& term) {
            auto it = spec.weights.find(term);
            if (it == spec.weights.end()) return 0.0;
            auto n = spec.normalization.find(term);
            return it->second * (n == spec.normalization.end() ? 1.0 : n->second);
        };
        w_career_xp_ = weight("career_xp");
        w_career_level_ = weight("career_level");
        w_career_event_ = weight("career_event_complete");
        w_event_xp_ = weight("event_xp");
        w_rel_xp_ = weight("relationship_xp");
        w_rel_event_ = weight("relationship_event_complete");
        w_goal_ = weight("goal_pending");
        for (const auto& [term, _] : spec.weights) {
            if (term.rfind(kCraftedItemPrefix, 0) == 0) {
                const int item = *rules.item_index(std::string_view(term).substr(kCraftedItemPrefix.size()));
                crafted_.emplace_back(item, weight(term));
            }
        }
        precompute();
    }

    const CompiledGoal& goal() const { return goal_; }

    double operator()(const GameState& s) const {
        if (goal_satisfied(goal_, s)) return 0.0;
        const Rules& r = *rules_;
        double h = w_goal_;

        if (goal_.kind == GoalKind::career_level_reached && s.career && s.career->career == goal_.index) {
            const auto& career = r.careers[static_cast<std::size_t>(goal_.index)];
            const std::int64_t remaining = std::max<std::int64_t>(0, career.xp_for_level(goal_.amount) - s.career->xp);
            const double best = best_career_yield(s);
            if (best > 0.0) h += w_career_xp_ * static_cast<double>(remaining) / best;
            h += w_career_level_ * static_cast<double>(std::max<std::int64_t>(0, goal_.amount - s.career->level));
            for (const auto& [item, w] : crafted_) {
                const double per_item = xp_per_item_[static_cast<std::size_t>(item)];
                const double made = item_yield_[static_cast<std::size_t>(item)];
                if (w == 0.0 || per_item <= 0.0 || made <= 0.0 || remaining == 0) continue;
                const double needed = std::ceil(static_cast<double>(remaining) / per_item) -
                                      static_cast<double>(s.inventory[static_cast<std::size_t>(item)]);
                if (needed > 0.0) h += w * needed / made;
            }
        }
        if (goal_.kind == GoalKind::event_completed) {
            const auto& e = r.events[static_cast<std::size_t>(goal_.index)];
            h += e.kind == EventKind::career ? w_career_event_ : w_rel_event_;
        }
        if (goal_.kind == GoalKind::relationship_chain_done || goal_.kind == GoalKind::any_relationship_chain_done) {
            const std::int64_t done = s.relationship ? s.relationship->completed : 0;
            h += w_rel_event_ * static_cast<double>(std::max<std::int64_t>(0, goal_.amount - done));
        }
        if (s.active_event) {
            const auto& ev = *s.active_event;
            const auto& e = r.events[static_cast<std::size_t>(ev.event)];
            const double best = best_event_xp_[static_cast<std::size_t>(ev.event)];
            if (best > 0.0) {
                std::int64_t next = e.final_threshold();
                for (const auto& step : e.steps) {
                    if (step.threshold > ev.xp) {
                        next = step.threshold;
                        break;
                    }
                }
                h += w_event_xp_ * static_cast<double>(std::max<std::int64_t>(0, next - ev.xp)) / best;
                if (e.kind == EventKind::relationship) {
                    h += w_rel_xp_ * static_cast<double>(std::max<std::int64_t>(0, e.final_threshold() - ev.xp)) / best;
                }
            }
        }
        return std::max(0.0, h);
    }

private:
    void check_term(const std::string& term) const {
        if (term.rfind(kCraftedItemPrefix, 0) == 0) {
            const auto id = std::string_view(term).substr(kCraftedItemPrefix.size());
            if (!rules_->item_index(id)) throw InvalidArgument("heuristic term '" + term + "' names an unknown item");
            return;
        }
        for (auto t : kHeuristicTerms) {
            if (t == term) return;
        }
        throw InvalidArgument("unknown heuristic term '" + term + "'");
    }

    void precompute() {
        const Rules& r = *rules_;
        best_event_xp_.assign(r.events.size(), 0.0);
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            for (int a : r.events[e].actions) {
                best_event_xp_[e] = std::max(best_event_xp_[e], static_cast<double>(r.actions[static_cast<std::size_t>(a)].reward.event_xp));
            }
        }
        // Career XP from an event's steps, spread over the fewest actions
        // that can finish the event.
        std::vector<double> amortized(r.events.size(), 0.0);
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            const auto& ev = r.events[e];
            if (best_event_xp_[e] <= 0.0) continue;
            double total = 0.0;
            for (const auto& step : ev.steps) total += static_cast<double>(step.reward.career_xp);
            amortized[e] = total / std::ceil(static_cast<double>(ev.final_threshold()) / best_event_xp_[e]);
        }
        career_yield_.assign(r.actions.size(), 0.0);
        for (std::size_t a = 0; a < r.actions.size(); ++a) {
            const auto& act = r.actions[a];
            double from_events = 0.0;
            if (act.reward.event_xp > 0) {
                for (int e : act.events) {
                    const auto& ev = r.events[static_cast<std::size_t>(e)];
                    if (goal_.kind == GoalKind::career_level_reached && ev.kind == EventKind::career && ev.owner == goal_.index) {
                        from_events = std::max(from_events, amortized[static_cast<std::size_t>(e)]);
                    }
                }
            }
            career_yield_[a] = static_cast<double>(act.reward.career_xp) + from_events;
        }
        xp_per_item_.assign(r.items.size(), 0.0);
        item_yield_.assign(r.items.size(), 0.0);
        for (std::size_t a = 0; a < r.actions.size(); ++a) {
            const auto& act = r.actions[a];
            for (const auto& [item, n] : act.consumes) {
                auto& v = xp_per_item_[static_cast<std::size_t>(item)];
                v = std::max(v, career_yield_[a] / static_cast<double>(n));
            }
            for (const auto& [item, n] : act.reward.items) {
                auto& v = item_yield_[static_cast<std::size_t>(item)];
                v = std::max(v, static_cast<double>(n));
            }
        }
    }

    // Best yield among actions this Sim could ever take with its career and
    // objects.
    double best_career_yield(const GameState& s) const {
        const Rules& r = *rules_;
        double best = 0.0;
        for (std::size_t a = 0; a < r.actions.size(); ++a) {
            const auto& q = r.actions[a].requirement;
            if (q.career >= 0 && q.career != goal_.index) continue;
            if (q.object >= 0 && !s.owned_objects[static_cast<std::size_t>(q.object)]) continue;
            best = std::max(best, career_yield_[a]);
        }
        return best;
    }

    const Rules* rules_;
    CompiledGoal goal_;
    double w_career_xp_ = 0, w_career_level_ = 0, w_career_event_ = 0, w_event_xp_ = 0;
    double w_rel_xp_ = 0, w_rel_event_ = 0, w_goal_ = 0;
    std::vector<std::pair<int, double>> crafted_;
    std::vector<double> best_event_xp_;
    std::vector<double> career_yield_;
    std::vector<double> xp_per_item_;
    std::vector<double> item_yield_;
};

inline double heuristic_eval(const Rules& r, const HeuristicSpec& spec, const GameState& s, const GoalSpec& goal) {
    return Heuristic(r, spec, goal)(s);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline GoalSpec read_goal(const json& j, const std::string& path = "goal") {
    detail::ObjectReader r(j, path);
    GoalSpec g;
    const std::string kind = detail::as_string(r.at("predicate"), r.sub("predicate"));
    if (kind == "career_level_reached") {
        g.kind = GoalKind::career_level_reached;
        g.target = detail::as_string(r.at("career"), r.sub("career"));
        g.amount = detail::as_int(r.at("level"), r.sub("level"));
    } else if (kind == "relationship_chain_done") {
        g.kind = GoalKind::relationship_chain_done;
        g.target = detail::as_string(r.at("category"), r.sub("category"));
        g.amount = detail::as_int(r.at("events"), r.sub("events"));
    } else if (kind == "any_relationship_chain_done") {
        g.kind = GoalKind::any_relationship_chain_done;
        g.amount = detail::as_int(r.at("events"), r.sub("events"));
    } else if (kind == "event_completed") {
        g.kind = GoalKind::event_completed;
        g.target = detail::as_string(r.at("event"), r.sub("event"));
    } else {
        throw SchemaError(r.sub("predicate") + ": unknown predicate '" + kind + "'");
    }
    if (auto* v = r.find("max_minutes")) g.max_minutes = detail::as_int(*v, r.sub("max_minutes"));
    if (auto* v = r.find("max_actions")) g.max_actions = detail::as_int(*v, r.sub("max_actions"));
    r.finish();
    if (g.max_minutes <= 0 || g.max_actions <= 0) throw SchemaError(path + ": limits must be positive");
    return g;
}

inline ordered_json to_json(const GoalSpec& g) {
    ordered_json j;
    j["predicate"] = to_string(g.kind);
    switch (g.kind) {
        case GoalKind::career_level_reached:
            j["career"] = g.target;
            j["level"] = g.amount;
            break;
        case GoalKind::relationship_chain_done:
            j["category"] = g.target;
            j["events"] = g.amount;
            break;
        case GoalKind::any_relationship_chain_done: j["events"] = g.amount; break;
        case GoalKind::event_completed: j["event"] = g.target; break;
    }
    j["max_minutes"] = g.max_minutes;
    j["max_actions"] = g.max_actions;
    return j;
}

inline std::map<std::string, double> read_real_map(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + ": expected object, got " + detail::type_name(j));
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number()) throw SchemaError(path + "." + it.key() + ": expected number");
        out[it.key()] = it.value().get<double>();
    }
    return out;
}

inline HeuristicSpec read_heuristic(const json& j, const std::string& path = "heuristic") {
    detail::ObjectReader r(j, path);
    HeuristicSpec h;
    h.weights = read_real_map(r.at("weights"), r.sub("weights"));
    if (auto* v = r.find("normalization")) h.normalization = read_real_map(*v, r.sub("normalization"));
    r.finish();
    return h;
}

inline ordered_json to_json(const HeuristicSpec& h) {
    ordered_json j;
    j["weights"] = h.weights;
    if (!h.normalization.empty()) j["normalization"] = h.normalization;
    return j;
}

inline ScenarioOverrides read_scenario(const json& j, const std::string& path = "scenario") {
    detail::ObjectReader r(j, path);
    ScenarioOverrides s;
    s.career = detail::as_optional_string(r.find("career"), r.sub("career"));
    s.relationship_category = detail::as_optional_string(r.find("relationship_category"), r.sub("relationship_category"));
    if (auto* v = r.find("grant_objects")) {
        // Either true (all unlocks of the career) or an explicit id list.
        if (v->is_boolean()) {
            s.grant_objects = v->get<bool>();
        } else {
            s.objects = detail::as_string_list(*v, r.sub("grant_objects"));
        }
    }
    if (auto* v = r.find("initial_resources")) s.initial_resources = detail::as_quantities(*v, r.sub("initial_resources"));
    r.finish();
    return s;
}

inline ordered_json to_json(const ScenarioOverrides& s) {
    ordered_json j = ordered_json::object();
    if (s.career) j["career"] = *s.career;
    if (s.relationship_category) j["relationship_category"] = *s.relationship_category;
    if (!s.objects.empty()) {
        j["grant_objects"] = s.objects;
    } else if (s.grant_objects) {
        j["grant_objects"] = true;
    }
    if (!s.initial_resources.empty()) j["initial_resources"] = s.initial_resources;
    return j;
}

}  // namespace playtest
