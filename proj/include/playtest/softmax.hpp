#pragma once

// Linear softmax policy over the same move set the A* planner uses, trained
// with REINFORCE. Intended as a weak baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "playtest/decision.hpp"
#include "playtest/episode.hpp"
#include "playtest/heuristic.hpp"
#include "playtest/rng.hpp"
#include "playtest/rules.hpp"
#include "playtest/sim.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

inline constexpr std::array<std::string_view, 12> kSoftmaxFeatures = {
    "cost",           "consume",           "duration",        "cooldown",
    "career_xp",      "event_xp",          "relationship_xp", "reward_resources",
    "reward_items",   "is_start",          "start_reward",    "is_wait",
};
inline constexpr std::size_t kFeatureCount = kSoftmaxFeatures.size();

using FeatureVector = std::array<double, kFeatureCount>;

struct SoftmaxPolicy {
    std::vector<std::string> feature_names;
    std::vector<double> weights;
    double temperature = 1.0;

    bool operator==(const SoftmaxPolicy&) const = default;
};

inline SoftmaxPolicy default_policy(double temperature = 1.0) {
    SoftmaxPolicy p;
    for (auto n : kSoftmaxFeatures) p.feature_names.emplace_back(n);
    p.weights.assign(kFeatureCount, 0.0);
    p.temperature = temperature;
    return p;
}

inline void check_policy(const SoftmaxPolicy& p) {
    if (p.feature_names.size() != kFeatureCount || p.weights.size() != kFeatureCount) {
        throw InvalidArgument("policy must have exactly " + std::to_string(kFeatureCount) + " features");
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (p.feature_names[i] != kSoftmaxFeatures[i]) throw InvalidArgument("unexpected policy feature '" + p.feature_names[i] + "'");
        if (!std::isfinite(p.weights[i])) throw InvalidArgument("policy weight '" + p.feature_names[i] + "' is not finite");
    }
    if (!(p.temperature > 0.0) || !std::isfinite(p.temperature)) throw InvalidArgument("policy temperature must be positive");
}

/// Per-config scales that map every feature into [0, 1].
class FeatureModel {
public:
    explicit FeatureModel(const Rules& r) : rules_(&r) {
        auto sum = [](const Amounts& xs) {
            double s = 0;
            for (const auto& [_, v] : xs) s += static_cast<double>(v);
            return s;
        };
        for (const auto& a : r.actions) {
            max_cost_ = std::max(max_cost_, sum(a.costs));
            max_consume_ = std::max(max_consume_, sum(a.consumes));
            max_duration_ = std::max(max_duration_, static_cast<double>(a.duration));
            max_cooldown_ = std::max(max_cooldown_, static_cast<double>(a.cooldown));
            max_career_ = std::max(max_career_, static_cast<double>(a.reward.career_xp));
            max_event_ = std::max(max_event_, static_cast<double>(a.reward.event_xp));
            max_rel_ = std::max(max_rel_, static_cast<double>(a.reward.relationship_xp));
            max_res_ = std::max(max_res_, sum(a.reward.resources));
            max_items_ = std::max(max_items_, sum(a.reward.items));
        }
        for (const auto& e : r.events) {
            double v = 0;
            for (const auto& s : e.steps) v += static_cast<double>(s.reward.career_xp + s.reward.relationship_xp);
            start_value_.push_back(v);
            max_start_ = std::max(max_start_, v);
        }
    }

    FeatureVector features(const GameState& s, const Edge& e) const {
        FeatureVector f{};
        auto norm = [](double v, double scale) { return scale > 0 ? v / scale : 0.0; };
        switch (e.kind) {
            case EdgeKind::act: {
                const auto& a = rules_->actions[static_cast<std::size_t>(e.index)];
                double cost = 0, consume = 0, res = 0, items = 0;
                for (const auto& [_, v] : a.costs) cost += static_cast<double>(v);
                for (const auto& [_, v] : a.consumes) consume += static_cast<double>(v);
                for (const auto& [_, v] : a.reward.resources) res += static_cast<double>(v);
                for (const auto& [_, v] : a.reward.items) items += static_cast<double>(v);
                const bool counts = s.active_event &&
                                    rules_->events[static_cast<std::size_t>(s.active_event->event)].has_action[static_cast<std::size_t>(e.index)];
                f[0] = norm(cost, max_cost_);
                f[1] = norm(consume, max_consume_);
                f[2] = norm(static_cast<double>(a.duration), max_duration_);
                f[3] = norm(static_cast<double>(a.cooldown), max_cooldown_);
                f[4] = norm(static_cast<double>(a.reward.career_xp), max_career_);
                f[5] = counts ? norm(static_cast<double>(a.reward.event_xp), max_event_) : 0.0;
                f[6] = norm(static_cast<double>(a.reward.relationship_xp), max_rel_);
                f[7] = norm(res, max_res_);
                f[8] = norm(items, max_items_);
                break;
            }
            case EdgeKind::start_event:
                f[9] = 1.0;
                f[10] = norm(start_value_[static_cast<std::size_t>(e.index)], max_start_);
                break;
            case EdgeKind::wait: f[11] = 1.0; break;
        }
        return f;
    }

private:
    const Rules* rules_;
    double max_cost_ = 0, max_consume_ = 0, max_duration_ = 0, max_cooldown_ = 0, max_career_ = 0;
    double max_event_ = 0, max_rel_ = 0, max_res_ = 0, max_items_ = 0, max_start_ = 0;
    std::vector<double> start_value_;
};

namespace detail {

inline double dot(const std::vector<double>& w, const FeatureVector& f) {
    double u = 0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) u += w[i] * f[i];
    return u;
}

// Softmax probabilities of utilities divided by temperature.
inline void softmax_probs(const std::vector<double>& utilities, double temperature, std::vector<double>& probs) {
    const double top = *std::max_element(utilities.begin(), utilities.end());
    probs.resize(utilities.size());
    double z = 0;
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        probs[i] = std::exp((utilities[i] - top) / temperature);
        z += probs[i];
    }
    for (auto& p : probs) p /= z;
}

inline std::size_t sample(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

}  // namespace detail

class SoftmaxPlanner {
public:
    SoftmaxPlanner(const Rules& r, SoftmaxPolicy policy, const GoalSpec& goal)
        : rules_(&r), policy_(std::move(policy)), model_(r), goal_(compile_goal(r, goal)) {
        check_policy(policy_);
    }

    /// Samples an edge; optional outputs are used for training.
    Decision decide_traced(const GameState& s, Rng& rng, std::vector<FeatureVector>* feats, std::vector<double>* probs,
                           std::size_t* chosen) const {
        if (goal_satisfied(goal_, s)) return stop_decision("goal reached");
        if (auto why = limit_reason(goal_, s); !why.empty()) return stop_decision(why);
        std::vector<Edge> edges;
        enumerate_edges(*rules_, s, edges);
        if (edges.empty()) return stop_decision("deadlock");
        std::vector<FeatureVector> local_feats;
        std::vector<double> local_probs;
        auto& fv = feats ? *feats : local_feats;
        auto& pv = probs ? *probs : local_probs;
        fv.clear();
        std::vector<double> utilities;
        for (const auto& e : edges) {
            fv.push_back(model_.features(s, e));
            utilities.push_back(detail::dot(policy_.weights, fv.back()));
        }
        detail::softmax_probs(utilities, policy_.temperature, pv);
        const std::size_t k = detail::sample(pv, rng);
        if (chosen) *chosen = k;
        return decision_for(*rules_, edges[k]);
    }

    Decision decide(const GameState& s, Rng& rng, SearchStats&) const { return decide_traced(s, rng, nullptr, nullptr, nullptr); }

    const SoftmaxPolicy& policy() const { return policy_; }
    SoftmaxPolicy& policy() { return policy_; }
    const CompiledGoal& goal() const { return goal_; }

private:
    const Rules* rules_;
    SoftmaxPolicy policy_;
    FeatureModel model_;
    CompiledGoal goal_;
};

inline Decision softmax_decide(const SoftmaxPolicy& policy, const Rules& r, const GameState& s, const GoalSpec& goal, Rng& rng) {
    SearchStats unused;
    return SoftmaxPlanner(r, policy, goal).decide(s, rng, unused);
}

struct TrainingResult {
    SoftmaxPolicy policy;
    std::vector<double> returns;  // one per episode
    std::int64_t failed_episodes = 0;

    double failure_rate() const {
        return returns.empty() ? 0.0 : static_cast<double>(failed_episodes) / static_cast<double>(returns.size());
    }
};

/// Return of a finished episode: fewer actions is better; failing to reach
/// the goal scores below any success.
inline double episode_return(const TrialRecord& t, const CompiledGoal& goal) {
    return t.goal_reached ? -static_cast<double>(t.counters.total_actions) : -static_cast<double>(goal.max_actions + 1);
}

/// REINFORCE with a moving-average baseline. Episode k uses seed
/// trial_seed(seed, k).
inline TrainingResult train_softmax(const Rules& r, const ScenarioOverrides& scenario, const GoalSpec& goal_spec,
                                    std::int64_t episodes, double step_size, double temperature, std::uint64_t seed) {
    if (episodes < 1) throw InvalidArgument("episodes must be at least 1");
    if (!(step_size > 0.0)) throw InvalidArgument("step size must be positive");
    SoftmaxPlanner planner(r, default_policy(temperature), goal_spec);
    const CompiledGoal goal = planner.goal();
    TrainingResult out;
    double baseline = 0.0;
    std::vector<FeatureVector> feats;
    std::vector<double> probs;
    for (std::int64_t ep = 0; ep < episodes; ++ep) {
        const std::uint64_t s_ep = trial_seed(seed, static_cast<std::uint64_t>(ep));
        GameState s = initial_state(r, scenario, s_ep);
        s.tracing = false;
        Rng rng(s_ep);
        FeatureVector grad{};
        std::int64_t steps = 0;
        bool reached = false;
        while (true) {
            if (goal_satisfied(goal, s)) {
                reached = true;
                break;
            }
            std::size_t k = 0;
            const Decision d = planner.decide_traced(s, rng, &feats, &probs, &k);
            if (d.kind == Decision::Kind::stop) break;
            // Score function of a softmax over linear utilities.
            for (std::size_t i = 0; i < kFeatureCount; ++i) {
                double expected = 0;
                for (std::size_t j = 0; j < feats.size(); ++j) expected += probs[j] * feats[j][i];
                grad[i] += (feats[k][i] - expected) / temperature;
            }
            ++steps;
            detail::follow_in_place(r, s, d.edge);
        }
        const double ret = reached ? -static_cast<double>(s.counters.total_actions) : -static_cast<double>(goal.max_actions + 1);
        if (!reached) ++out.failed_episodes;
        if (ep == 0) baseline = ret;
        const double advantage = (ret - baseline) / std::max(1.0, std::fabs(baseline));
        if (steps > 0) {
            auto& w = planner.policy().weights;
            for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] += step_size * advantage * grad[i] / static_cast<double>(steps);
        }
        baseline += 0.1 * (ret - baseline);
        out.returns.push_back(ret);
    }
    out.policy = planner.policy();
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline ordered_json to_json(const SoftmaxPolicy& p) {
    ordered_json j;
    j["feature_names"] = p.feature_names;
    j["weights"] = p.weights;
    j["temperature"] = p.temperature;
    return j;
}

inline SoftmaxPolicy read_policy(const json& j, const std::string& path = "policy") {
    detail::ObjectReader r(j, path);
    SoftmaxPolicy p;
    p.feature_names = detail::as_string_list(r.at("feature_names"), r.sub("feature_names"));
    const json& w = r.at("weights");
    if (!w.is_array()) throw SchemaError(r.sub("weights") + ": expected array");
    for (const auto& x : w) {
        if (!x.is_number()) throw SchemaError(r.sub("weights") + ": expected numbers");
        p.weights.push_back(x.get<double>());
    }
    const json& t = r.at("temperature");
    if (!t.is_number()) throw SchemaError(r.sub("temperature") + ": expected number");
    p.temperature = t.get<double>();
    r.finish();
    try {
        check_policy(p);
    } catch (const InvalidArgument& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return p;
}

}  // namespace playtest
