#pragma once

// The designer studies: batches of seeded episodes reduced to AggregateStats.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "playtest/astar.hpp"
#include "playtest/episode.hpp"
#include "playtest/error.hpp"
#include "playtest/heuristic.hpp"
#include "playtest/rng.hpp"
#include "playtest/rules.hpp"
#include "playtest/softmax.hpp"
#include "playtest/stats.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

enum class ExperimentKind { relationship_balance, career_progression, object_impact, build_comparison, agent_comparison };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::relationship_balance: return "relationship_balance";
        case ExperimentKind::career_progression: return "career_progression";
        case ExperimentKind::object_impact: return "object_impact";
        case ExperimentKind::build_comparison: return "build_comparison";
        case ExperimentKind::agent_comparison: return "agent_comparison";
    }
    return "?";
}

struct CareerTarget {
    std::string career;
    std::int64_t level = 1;

    bool operator==(const CareerTarget&) const = default;
};

struct SoftmaxTraining {
    std::int64_t episodes = 500;
    double step_size = 0.5;
    double temperature = 1.0;

    bool operator==(const SoftmaxTraining&) const = default;
};

struct AgentSpec {
    enum class Type { astar, softmax };
    Type type = Type::astar;
    int node_budget = kDefaultNodeBudget;
    std::optional<std::string> policy_path;  // softmax weights file
    SoftmaxTraining train;                   // used when no policy file is given
    std::vector<double> temperatures;        // evaluation temperatures (agent_comparison)

    bool operator==(const AgentSpec&) const = default;
};

struct ExperimentConfig {
    std::string id;
    ExperimentKind kind = ExperimentKind::career_progression;
    std::vector<std::string> tuning_refs;
    ScenarioOverrides scenario;
    HeuristicSpec heuristic;
    std::optional<GoalSpec> goal;      // relationship_balance
    std::vector<CareerTarget> careers; // career-based studies
    std::int64_t max_minutes = 1'000'000;
    std::int64_t max_actions = 100'000;
    std::int64_t trials = 1000;
    std::uint64_t base_seed = 0;
    AgentSpec agent;

    bool operator==(const ExperimentConfig&) const = default;
};

struct ExperimentOptions {
    int parallel = 1;
};

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

/// Evaluates fn(0..n-1) on up to `parallel` threads. Results are stored by
/// index, so the output never depends on scheduling. The first exception (by
/// index) is rethrown after all workers finish.
template <class Fn>
auto run_indexed(std::int64_t n, int parallel, Fn&& fn) -> std::vector<decltype(fn(std::int64_t{}))> {
    using R = decltype(fn(std::int64_t{}));
    std::vector<R> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    std::vector<std::exception_ptr> errors(out.size());
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t i = next++; i < n; i = next++) {
            try {
                out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = static_cast<int>(std::clamp<std::int64_t>(parallel, 1, std::max<std::int64_t>(n, 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

/// A batch of trials with its headline statistics.
struct TrialBatch {
    std::string group;
    std::string agent;
    std::string build;
    std::vector<TrialRecord> trials;
    AggregateStats total_actions;
    AggregateStats event_actions;
    AggregateStats sessions;
    double mean_wait = 0.0;  // pooled over every session gap
    std::int64_t wait_gaps = 0;
    std::int64_t goals_reached = 0;
};

inline TrialBatch summarize(std::string group, std::string agent, std::string build, std::vector<TrialRecord> trials) {
    TrialBatch b;
    b.group = std::move(group);
    b.agent = std::move(agent);
    b.build = std::move(build);
    Accumulator total, event, sessions;
    long double wait_sum = 0;
    for (const auto& t : trials) {
        total.add(static_cast<double>(t.counters.total_actions));
        event.add(static_cast<double>(t.counters.event_actions));
        sessions.add(static_cast<double>(t.counters.sessions));
        for (auto w : t.counters.wait_intervals) {
            wait_sum += w;
            ++b.wait_gaps;
        }
        if (t.goal_reached) ++b.goals_reached;
    }
    b.total_actions = total.stats(b.group);
    b.event_actions = event.stats(b.group);
    b.sessions = sessions.stats(b.group);
    b.mean_wait = b.wait_gaps ? static_cast<double>(wait_sum / b.wait_gaps) : 0.0;
    b.trials = std::move(trials);
    return b;
}

/// Running mean of total actions against trial count.
inline std::vector<double> convergence_series(const std::vector<TrialRecord>& trials) {
    std::vector<double> out;
    long double sum = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        sum += trials[i].counters.total_actions;
        out.push_back(static_cast<double>(sum / static_cast<long double>(i + 1)));
    }
    return out;
}

namespace detail {

inline GoalSpec career_goal_for(const ExperimentConfig& xc, const CareerTarget& t) {
    GoalSpec g = career_goal(t.career, t.level);
    g.max_minutes = xc.max_minutes;
    g.max_actions = xc.max_actions;
    return g;
}

inline void check_targets(const Rules& r, const std::vector<CareerTarget>& careers) {
    for (const auto& t : careers) {
        const auto& c = r.careers[static_cast<std::size_t>(r.require_career(t.career))];
        if (t.level > c.max_level) {
            throw TargetAboveCap("target level " + std::to_string(t.level) + " exceeds max level " +
                                 std::to_string(c.max_level) + " of '" + t.career + "'");
        }
        if (t.level < 1) throw InvalidArgument("target level must be at least 1");
    }
}

inline SoftmaxPolicy policy_for(const Rules& r, const ExperimentConfig& xc, const ScenarioOverrides& scenario,
                                const GoalSpec& goal, const std::filesystem::path& base_dir) {
    if (xc.agent.policy_path) {
        const auto path = base_dir / *xc.agent.policy_path;
        return read_policy(detail::parse_json_text(read_text_file(path)), path.string());
    }
    const auto& t = xc.agent.train;
    return train_softmax(r, scenario, goal, t.episodes, t.step_size, t.temperature, xc.base_seed).policy;
}

}  // namespace detail

template <class Planner>
std::vector<TrialRecord> run_batch(const Rules& r, const ScenarioOverrides& scenario, const Planner& planner,
                                   const CompiledGoal& goal, std::int64_t trials, std::uint64_t base_seed,
                                   const ExperimentOptions& opt) {
    return run_indexed(trials, opt.parallel, [&](std::int64_t i) {
        return run_episode(r, scenario, trial_seed(base_seed, static_cast<std::uint64_t>(i)), planner, goal);
    });
}

/// Runs the configured agent for one scenario/goal pair.
inline std::vector<TrialRecord> run_agent(const Rules& r, const ExperimentConfig& xc, const ScenarioOverrides& scenario,
                                          const GoalSpec& goal, const ExperimentOptions& opt,
                                          const std::filesystem::path& base_dir = {}) {
    const CompiledGoal cg = compile_goal(r, goal);
    if (xc.agent.type == AgentSpec::Type::astar) {
        const AStarPlanner planner(r, xc.heuristic, goal, xc.agent.node_budget);
        return run_batch(r, scenario, planner, cg, xc.trials, xc.base_seed, opt);
    }
    const SoftmaxPlanner planner(r, detail::policy_for(r, xc, scenario, goal, base_dir), goal);
    return run_batch(r, scenario, planner, cg, xc.trials, xc.base_seed, opt);
}

inline std::string_view agent_name(const AgentSpec& a) { return a.type == AgentSpec::Type::astar ? "astar" : "softmax"; }

// ---------------------------------------------------------------------------
// Relationship balance
// ---------------------------------------------------------------------------

struct RelationshipBalance {
    std::vector<TrialRecord> trials;
    // Keyed by (category, 1-based chain position); only completed events count.
    std::map<std::pair<std::string, int>, AggregateStats> event_actions;
    std::map<std::pair<std::string, int>, AggregateStats> attempts;
    std::map<std::string, std::int64_t> category_counts;
};

inline std::string group_key(const std::pair<std::string, int>& k) { return k.first + "#" + std::to_string(k.second); }

inline RelationshipBalance relationship_balance(const Rules& r, const ExperimentConfig& xc, const ExperimentOptions& opt = {},
                                                const std::filesystem::path& base_dir = {}) {
    if (r.categories.empty()) throw NoRelationshipEvents("config declares no relationship categories");
    if (!xc.goal || (xc.goal->kind != GoalKind::any_relationship_chain_done && xc.goal->kind != GoalKind::relationship_chain_done)) {
        throw InvalidArgument("relationship_balance needs a relationship chain goal");
    }
    RelationshipBalance out;
    out.trials = run_agent(r, xc, xc.scenario, *xc.goal, opt, base_dir);
    std::map<std::pair<std::string, int>, Accumulator> actions, attempts;
    for (const auto& t : out.trials) {
        if (t.relationship_category) ++out.category_counts[*t.relationship_category];
        std::map<std::pair<std::string, int>, std::pair<std::int64_t, std::int64_t>> per_event;  // actions, attempts
        std::map<std::pair<std::string, int>, bool> completed;
        for (const auto& e : t.counters.event_history) {
            if (e.kind != EventKind::relationship) continue;
            const auto key = std::make_pair(e.owner_id, e.chain_index + 1);
            per_event[key].first += e.event_actions;
            per_event[key].second += 1;
            if (e.completed) completed[key] = true;
        }
        for (const auto& [key, v] : per_event) {
            if (!completed[key]) continue;
            actions[key].add(static_cast<double>(v.first));
            attempts[key].add(static_cast<double>(v.second));
        }
    }
    for (const auto& [k, a] : actions) out.event_actions[k] = a.stats(group_key(k));
    for (const auto& [k, a] : attempts) out.attempts[k] = a.stats(group_key(k));
    return out;
}

// ---------------------------------------------------------------------------
// Career progression and objects
// ---------------------------------------------------------------------------

inline std::vector<TrialBatch> career_progression(const Rules& r, const std::vector<CareerTarget>& careers,
                                                  const ExperimentConfig& xc, const ExperimentOptions& opt = {},
                                                  const std::filesystem::path& base_dir = {}) {
    detail::check_targets(r, careers);
    std::vector<TrialBatch> out;
    for (const auto& t : careers) {
        ScenarioOverrides sc = xc.scenario;
        sc.career = t.career;
        out.push_back(summarize(t.career, std::string(agent_name(xc.agent)), r.config().build_id,
                                run_agent(r, xc, sc, detail::career_goal_for(xc, t), opt, base_dir)));
    }
    return out;
}

struct ObjectImpactRow {
    std::string career;
    TrialBatch baseline;
    std::optional<TrialBatch> with_objects;  // absent when no object unlocks below the target
    std::int64_t price_total = 0;
    double reduction_pct = 0.0;
    std::optional<double> rho_per_action_saved;
};

inline std::vector<ObjectImpactRow> object_impact(const Rules& r, const std::vector<CareerTarget>& careers,
                                                  const ExperimentConfig& xc, const ExperimentOptions& opt = {},
                                                  const std::filesystem::path& base_dir = {}) {
    detail::check_targets(r, careers);
    std::vector<ObjectImpactRow> out;
    for (const auto& t : careers) {
        ObjectImpactRow row;
        row.career = t.career;
        const auto& career = r.careers[static_cast<std::size_t>(r.require_career(t.career))];
        bool usable = false;
        for (const auto& u : career.unlocks) {
            if (u.level < t.level) {
                usable = true;
                row.price_total += u.price;
            }
        }
        ScenarioOverrides base = xc.scenario;
        base.career = t.career;
        base.grant_objects = false;
        base.objects.clear();
        const GoalSpec goal = detail::career_goal_for(xc, t);
        row.baseline = summarize(t.career, std::string(agent_name(xc.agent)), "baseline", run_agent(r, xc, base, goal, opt, base_dir));
        if (usable) {
            ScenarioOverrides granted = base;
            granted.grant_objects = true;
            row.with_objects =
                summarize(t.career, std::string(agent_name(xc.agent)), "objects", run_agent(r, xc, granted, goal, opt, base_dir));
            const double b = row.baseline.total_actions.mean;
            const double w = row.with_objects->total_actions.mean;
            row.reduction_pct = b > 0 ? (b - w) / b * 100.0 : 0.0;
            if (b - w > 0) row.rho_per_action_saved = static_cast<double>(row.price_total) / (b - w);
        }
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Build comparison
// ---------------------------------------------------------------------------

struct BuildRow {
    std::string career;
    std::string build;  // "a" or "b"
    std::string build_id;
    TrialBatch batch;
};

inline std::vector<BuildRow> build_comparison(const Rules& a, const Rules& b, const std::vector<CareerTarget>& careers,
                                              const ExperimentConfig& xc, const ExperimentOptions& opt = {},
                                              const std::filesystem::path& base_dir = {}) {
    for (const auto& t : careers) {
        for (const Rules* r : {&a, &b}) {
            if (!r->career_index(t.career)) {
                throw CareerMissingInBuild("career '" + t.career + "' is missing in build '" + r->config().build_id + "'");
            }
        }
    }
    detail::check_targets(a, careers);
    detail::check_targets(b, careers);
    std::vector<BuildRow> out;
    for (const auto& t : careers) {
        ScenarioOverrides sc = xc.scenario;
        sc.career = t.career;
        const GoalSpec goal = detail::career_goal_for(xc, t);
        for (auto [label, r] : {std::pair{"a", &a}, std::pair{"b", &b}}) {
            out.push_back({t.career, label, r->config().build_id,
                           summarize(t.career, std::string(agent_name(xc.agent)), r->config().build_id,
                                     run_agent(*r, xc, sc, goal, opt, base_dir))});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agent comparison
// ---------------------------------------------------------------------------

struct AgentComparisonRow {
    std::string career;
    TrialBatch astar;
    SoftmaxPolicy policy;
    std::vector<std::pair<double, TrialBatch>> softmax;  // per evaluation temperature
};

inline std::vector<AgentComparisonRow> agent_comparison(const Rules& r, const std::vector<CareerTarget>& careers,
                                                        const ExperimentConfig& xc, const ExperimentOptions& opt = {},
                                                        const std::filesystem::path& base_dir = {}) {
    detail::check_targets(r, careers);
    std::vector<AgentComparisonRow> out;
    for (const auto& t : careers) {
        AgentComparisonRow row;
        row.career = t.career;
        ScenarioOverrides sc = xc.scenario;
        sc.career = t.career;
        const GoalSpec goal = detail::career_goal_for(xc, t);
        const CompiledGoal cg = compile_goal(r, goal);
        const AStarPlanner astar(r, xc.heuristic, goal, xc.agent.node_budget);
        row.astar = summarize(t.career, "astar", r.config().build_id, run_batch(r, sc, astar, cg, xc.trials, xc.base_seed, opt));
        row.policy = detail::policy_for(r, xc, sc, goal, base_dir);
        std::vector<double> temps = xc.agent.temperatures;
        if (temps.empty()) temps.push_back(row.policy.temperature);
        for (double temp : temps) {
            SoftmaxPolicy p = row.policy;
            p.temperature = temp;
            const SoftmaxPlanner planner(r, p, goal);
            row.softmax.emplace_back(temp, summarize(t.career, "softmax", r.config().build_id,
                                                     run_batch(r, sc, planner, cg, xc.trials, xc.base_seed, opt)));
        }
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline ExperimentKind read_kind(const json& j, const std::string& path) {
    const std::string s = detail::as_string(j, path);
    for (auto k : {ExperimentKind::relationship_balance, ExperimentKind::career_progression, ExperimentKind::object_impact,
                   ExperimentKind::build_comparison, ExperimentKind::agent_comparison}) {
        if (to_string(k) == s) return k;
    }
    throw SchemaError(path + ": unknown experiment kind '" + s + "'");
}

inline double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path + ": expected number, got " + detail::type_name(j));
    return j.get<double>();
}

inline AgentSpec read_agent(const json& j, const std::string& path) {
    detail::ObjectReader r(j, path);
    AgentSpec a;
    const std::string type = detail::as_string(r.at("type"), r.sub("type"));
    if (type == "astar") {
        a.type = AgentSpec::Type::astar;
    } else if (type == "softmax") {
        a.type = AgentSpec::Type::softmax;
    } else {
        throw SchemaError(r.sub("type") + ": expected \"astar\" or \"softmax\"");
    }
    if (auto* v = r.find("node_budget")) a.node_budget = static_cast<int>(detail::as_int(*v, r.sub("node_budget")));
    if (a.node_budget < 1) throw SchemaError(r.sub("node_budget") + ": must be at least 1");
    a.policy_path = detail::as_optional_string(r.find("policy"), r.sub("policy"));
    if (auto* v = r.find("train")) {
        detail::ObjectReader t(*v, r.sub("train"));
        if (auto* x = t.find("episodes")) a.train.episodes = detail::as_int(*x, t.sub("episodes"));
        if (auto* x = t.find("step_size")) a.train.step_size = as_real(*x, t.sub("step_size"));
        if (auto* x = t.find("temperature")) a.train.temperature = as_real(*x, t.sub("temperature"));
        t.finish();
        if (a.train.episodes < 1 || !(a.train.step_size > 0) || !(a.train.temperature > 0)) {
            throw SchemaError(r.sub("train") + ": episodes, step_size and temperature must be positive");
        }
    }
    if (auto* v = r.find("temperatures")) {
        if (!v->is_array()) throw SchemaError(r.sub("temperatures") + ": expected array");
        for (const auto& x : *v) {
            a.temperatures.push_back(as_real(x, r.sub("temperatures")));
            if (!(a.temperatures.back() > 0)) throw SchemaError(r.sub("temperatures") + ": must be positive");
        }
    }
    r.finish();
    return a;
}

inline ExperimentConfig read_experiment(const json& j, const std::string& path) {
    detail::ObjectReader r(j, path);
    ExperimentConfig x;
    x.id = detail::as_string(r.at("id"), r.sub("id"));
    x.kind = read_kind(r.at("kind"), r.sub("kind"));
    const json& refs = r.at("tuning");
    if (refs.is_string()) {
        x.tuning_refs.push_back(refs.get<std::string>());
    } else {
        x.tuning_refs = detail::as_string_list(refs, r.sub("tuning"));
    }
    const std::size_t want = x.kind == ExperimentKind::build_comparison ? 2 : 1;
    if (x.tuning_refs.size() != want) {
        throw SchemaError(r.sub("tuning") + ": expected " + std::to_string(want) + " tuning file(s)");
    }
    if (auto* v = r.find("scenario")) x.scenario = read_scenario(*v, r.sub("scenario"));
    x.heuristic = read_heuristic(r.at("heuristic"), r.sub("heuristic"));
    if (auto* v = r.find("goal")) x.goal = read_goal(*v, r.sub("goal"));
    if (auto* v = r.find("careers")) {
        if (!v->is_array()) throw SchemaError(r.sub("careers") + ": expected array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string p = r.sub("careers") + "[" + std::to_string(i) + "]";
            detail::ObjectReader c((*v)[i], p);
            CareerTarget t;
            t.career = detail::as_string(c.at("career"), c.sub("career"));
            t.level = detail::as_int(c.at("level"), c.sub("level"));
            c.finish();
            x.careers.push_back(t);
        }
    }
    if (auto* v = r.find("max_minutes")) x.max_minutes = detail::as_int(*v, r.sub("max_minutes"));
    if (auto* v = r.find("max_actions")) x.max_actions = detail::as_int(*v, r.sub("max_actions"));
    if (x.max_minutes <= 0 || x.max_actions <= 0) throw SchemaError(path + ": limits must be positive");
    x.trials = detail::as_int(r.at("trials"), r.sub("trials"));
    if (x.trials < 1) throw SchemaError(r.sub("trials") + ": must be at least 1");
    const json& seed = r.at("base_seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
        throw SchemaError(r.sub("base_seed") + ": expected non-negative integer");
    }
    x.base_seed = seed.get<std::uint64_t>();
    if (auto* v = r.find("agent")) x.agent = read_agent(*v, r.sub("agent"));
    r.finish();
    if (x.kind == ExperimentKind::relationship_balance && !x.goal) throw SchemaError(path + ": relationship_balance needs a goal");
    return x;
}

inline std::vector<ExperimentConfig> read_suite(const json& j) {
    if (!j.is_array()) throw SchemaError("suite: expected an array of experiments");
    std::vector<ExperimentConfig> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_experiment(j[i], "suite[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace playtest
