#pragma once

// Index-based form of a validated TuningConfig. The simulator and planners
// work on integer indices; ids are kept for reporting. Actions and events are
// stored sorted by id so index order is lexicographic order.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "playtest/error.hpp"
#include "playtest/tuning.hpp"
#include "playtest/tuning_analysis.hpp"

namespace playtest {

using Amounts = std::vector<std::pair<int, std::int64_t>>;

struct CompiledReward {
    std::int64_t career_xp = 0;
    std::int64_t event_xp = 0;
    std::int64_t relationship_xp = 0;
    Amounts resources;
    Amounts items;
};

struct CompiledRequirement {
    int career = -1;
    std::int64_t min_level = 0;
    int object = -1;
    bool during_event = false;
};

struct CompiledResource {
    std::string id;
    std::int64_t capacity = 0;
    std::int64_t regen_num = 0;
    std::int64_t regen_den = 1;
    std::int64_t initial = 0;
};

struct CompiledAction {
    std::string id;
    Amounts costs;
    Amounts consumes;
    std::int64_t duration = 0;
    std::int64_t cooldown = 0;
    CompiledReward reward;
    CompiledRequirement requirement;
    bool delayed_effect = false;
    std::vector<int> events;  // events listing this action
};

struct CompiledStep {
    std::int64_t threshold = 0;
    CompiledReward reward;
};

struct CompiledEvent {
    std::string id;
    EventKind kind = EventKind::career;
    int owner = -1;  // career or category index
    std::int64_t time_limit = 0;
    std::vector<int> actions;
    std::vector<char> has_action;  // indexed by action
    std::vector<CompiledStep> steps;
    CompiledRequirement start;
    std::int64_t unlock_level = 1;  // lowest career level listing this event
    int chain_index = -1;           // position in the owner chain (relationship events)

    std::int64_t final_threshold() const { return steps.back().threshold; }
};

struct CompiledCareer {
    std::string id;
    std::int64_t max_level = 1;
    std::vector<std::int64_t> xp_per_level;
    std::vector<int> craft_items;
    struct Unlock {
        int object = -1;
        std::int64_t level = 1;
        std::int64_t price = 0;
    };
    std::vector<Unlock> unlocks;
    std::vector<int> events;

    /// Cumulative XP needed to stand at `level` (level 1 needs none).
    std::int64_t xp_for_level(std::int64_t level) const {
        if (level <= 1) return 0;
        return xp_per_level[static_cast<std::size_t>(std::min(level, max_level) - 2)];
    }
};

struct CompiledCategory {
    std::string id;
    std::vector<int> chain;
};

struct CompiledObject {
    std::string id;
    std::vector<std::pair<int, std::int64_t>> unlock_levels;  // (career, level)
};

class Rules {
public:
    explicit Rules(TuningConfig config) : config_(std::move(config)) {
        const auto diags = validate(config_);
        for (const auto& d : diags) {
            if (d.severity == Severity::error) throw InvariantViolation(d.rule, d.entity + ": " + d.message);
        }
        compile();
    }

    const TuningConfig& config() const { return config_; }

    std::vector<CompiledResource> resources;
    std::vector<CompiledAction> actions;
    std::vector<CompiledEvent> events;
    std::vector<CompiledCareer> careers;
    std::vector<CompiledCategory> categories;
    std::vector<CompiledObject> objects;
    std::vector<std::string> items;

    std::optional<int> resource_index(std::string_view id) const { return lookup(resource_ids_, id); }
    std::optional<int> action_index(std::string_view id) const { return lookup(action_ids_, id); }
    std::optional<int> event_index(std::string_view id) const { return lookup(event_ids_, id); }
    std::optional<int> career_index(std::string_view id) const { return lookup(career_ids_, id); }
    std::optional<int> category_index(std::string_view id) const { return lookup(category_ids_, id); }
    std::optional<int> object_index(std::string_view id) const { return lookup(object_ids_, id); }
    std::optional<int> item_index(std::string_view id) const { return lookup(item_ids_, id); }

    int require_career(std::string_view id) const {
        auto i = career_index(id);
        if (!i) throw UnknownCareer("unknown career '" + std::string(id) + "'");
        return *i;
    }
    int require_event(std::string_view id) const {
        auto i = event_index(id);
        if (!i) throw UnknownEvent("unknown event '" + std::string(id) + "'");
        return *i;
    }

    /// Level at which `object` becomes usable for `career`, if it is one of its unlocks.
    std::optional<std::int64_t> unlock_level(int career, int object) const {
        for (const auto& [c, level] : objects[static_cast<std::size_t>(object)].unlock_levels) {
            if (c == career) return level;
        }
        return std::nullopt;
    }

private:
    using IdMap = std::map<std::string, int, std::less<>>;

    static std::optional<int> lookup(const IdMap& m, std::string_view id) {
        auto it = m.find(id);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    template <class T>
    static IdMap index_sorted(const std::vector<T>& xs) {
        std::vector<std::string> ids;
        for (const auto& x : xs) ids.push_back(x.id);
        std::sort(ids.begin(), ids.end());
        IdMap m;
        for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = static_cast<int>(i);
        return m;
    }

    int idx(const IdMap& m, const std::string& id) const { return m.at(id); }

    Amounts amounts(const IdMap& m, const Quantities& q) const {
        Amounts out;
        for (const auto& [id, v] : q) {
            if (v != 0) out.emplace_back(idx(m, id), v);
        }
        return out;
    }

    CompiledReward reward(const RewardBundle& b) const {
        return {b.career_xp, b.event_xp, b.relationship_xp, amounts(resource_ids_, b.resources),
                amounts(item_ids_, b.items)};
    }

    CompiledRequirement requirement(const RequirementSet& q) const {
        CompiledRequirement r;
        if (q.career) r.career = idx(career_ids_, *q.career);
        r.min_level = q.min_level;
        if (q.owned_object) r.object = idx(object_ids_, *q.owned_object);
        r.during_event = q.during_event;
        return r;
    }

    void compile() {
        const TuningConfig& c = config_;
        resource_ids_ = index_sorted(c.resources);
        action_ids_ = index_sorted(c.actions);
        event_ids_ = index_sorted(c.events);
        career_ids_ = index_sorted(c.careers);
        category_ids_ = index_sorted(c.relationships);
        object_ids_ = index_sorted(c.objects);

        std::set<std::string> item_names;
        auto add_items = [&](const Quantities& q) {
            for (const auto& [id, _] : q) item_names.insert(id);
        };
        for (const auto& a : c.actions) {
            add_items(a.consumes_items);
            add_items(a.rewards.items);
        }
        for (const auto& e : c.events) {
            for (const auto& s : e.steps) add_items(s.reward.items);
        }
        for (const auto& k : c.careers) item_names.insert(k.craft_items.begin(), k.craft_items.end());
        items.assign(item_names.begin(), item_names.end());
        for (std::size_t i = 0; i < items.size(); ++i) item_ids_[items[i]] = static_cast<int>(i);

        resources.resize(c.resources.size());
        for (const auto& r : c.resources) {
            resources[static_cast<std::size_t>(idx(resource_ids_, r.id))] =
                CompiledResource{r.id, r.capacity, r.regen_rate.num, r.regen_rate.den, r.initial};
        }

        actions.resize(c.actions.size());
        for (const auto& a : c.actions) {
            CompiledAction& ca = actions[static_cast<std::size_t>(idx(action_ids_, a.id))];
            ca.id = a.id;
            ca.costs = amounts(resource_ids_, a.costs);
            ca.consumes = amounts(item_ids_, a.consumes_items);
            ca.duration = a.duration;
            ca.cooldown = a.cooldown;
            ca.reward = reward(a.rewards);
            ca.requirement = requirement(a.requirements);
            ca.delayed_effect = a.delayed_effect;
        }

        categories.resize(c.relationships.size());
        for (const auto& r : c.relationships) {
            CompiledCategory& cc = categories[static_cast<std::size_t>(idx(category_ids_, r.id))];
            cc.id = r.id;
            for (const auto& e : r.event_chain) cc.chain.push_back(idx(event_ids_, e));
        }

        events.resize(c.events.size());
        for (const auto& e : c.events) {
            const int ei = idx(event_ids_, e.id);
            CompiledEvent& ce = events[static_cast<std::size_t>(ei)];
            ce.id = e.id;
            ce.kind = e.kind;
            ce.owner = e.kind == EventKind::career ? idx(career_ids_, e.owner_id) : idx(category_ids_, e.owner_id);
            ce.time_limit = e.time_limit;
            ce.has_action.assign(actions.size(), 0);
            for (const auto& id : e.action_ids) {
                const int ai = idx(action_ids_, id);
                if (!ce.has_action[static_cast<std::size_t>(ai)]) {
                    ce.actions.push_back(ai);
                    ce.has_action[static_cast<std::size_t>(ai)] = 1;
                    actions[static_cast<std::size_t>(ai)].events.push_back(ei);
                }
            }
            for (const auto& s : e.steps) ce.steps.push_back({s.xp_threshold, reward(s.reward)});
            ce.start = requirement(e.start_requires);
            if (e.kind == EventKind::relationship) {
                const auto& chain = categories[static_cast<std::size_t>(ce.owner)].chain;
                auto it = std::find(chain.begin(), chain.end(), ei);
                if (it != chain.end()) ce.chain_index = static_cast<int>(it - chain.begin());
            }
        }
        for (auto& a : actions) std::sort(a.events.begin(), a.events.end());

        objects.resize(c.objects.size());
        for (const auto& o : c.objects) objects[static_cast<std::size_t>(idx(object_ids_, o.id))].id = o.id;

        careers.resize(c.careers.size());
        std::map<int, std::int64_t> lowest_level;
        for (const auto& k : c.careers) {
            const int ki = idx(career_ids_, k.id);
            CompiledCareer& ck = careers[static_cast<std::size_t>(ki)];
            ck.id = k.id;
            ck.max_level = k.max_level;
            ck.xp_per_level = k.xp_per_level;
            for (const auto& it : k.craft_items) ck.craft_items.push_back(idx(item_ids_, it));
            for (const auto& u : k.object_unlocks) {
                const int oi = idx(object_ids_, u.object_id);
                ck.unlocks.push_back({oi, u.unlock_level, u.price_rho});
                objects[static_cast<std::size_t>(oi)].unlock_levels.emplace_back(ki, u.unlock_level);
            }
            for (const auto& [level, ids] : k.events_by_level) {
                for (const auto& id : ids) {
                    auto [it, fresh] = lowest_level.emplace(idx(event_ids_, id), level);
                    if (!fresh) it->second = std::min(it->second, level);
                }
            }
        }
        for (const auto& [ei, level] : lowest_level) events[static_cast<std::size_t>(ei)].unlock_level = level;
        for (std::size_t ei = 0; ei < events.size(); ++ei) {
            if (events[ei].kind == EventKind::career) {
                careers[static_cast<std::size_t>(events[ei].owner)].events.push_back(static_cast<int>(ei));
            }
        }
    }

    TuningConfig config_;
    IdMap resource_ids_;
    IdMap action_ids_;
    IdMap event_ids_;
    IdMap career_ids_;
    IdMap category_ids_;
    IdMap object_ids_;
    IdMap item_ids_;
};

using RulesPtr = std::shared_ptr<const Rules>;

inline RulesPtr make_rules(TuningConfig config) { return std::make_shared<const Rules>(std::move(config)); }

}  // namespace playtest
