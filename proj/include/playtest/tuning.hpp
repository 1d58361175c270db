#pragma once

// Declarative game definition for one build. Plain value types; parsing and
// analysis live in tuning_io.hpp and tuning_analysis.hpp.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace playtest {

inline constexpr int kSchemaVersion = 1;

/// Units per in-game minute, kept exact.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    bool operator==(const Rational&) const = default;
};

using Quantities = std::map<std::string, std::int64_t>;

struct RewardBundle {
    std::int64_t career_xp = 0;
    std::int64_t event_xp = 0;
    std::int64_t relationship_xp = 0;
    Quantities resources;
    Quantities items;

    bool operator==(const RewardBundle&) const = default;
};

struct RequirementSet {
    std::optional<std::string> career;
    std::int64_t min_level = 0;
    std::optional<std::string> owned_object;
    bool during_event = false;

    bool operator==(const RequirementSet&) const = default;
};

struct ResourceSpec {
    std::string id;
    std::int64_t capacity = 0;
    Rational regen_rate;
    std::int64_t initial = 0;

    bool operator==(const ResourceSpec&) const = default;
};

struct ActionSpec {
    std::string id;
    Quantities costs;
    Quantities consumes_items;
    std::int64_t duration = 0;
    std::int64_t cooldown = 0;
    RewardBundle rewards;
    RequirementSet requirements;  // "requires" in the tuning file
    std::string category_tag;
    // Event action that deliberately grants no event XP.
    bool filler = false;
    // Effect resolves later and depends on the relationship category; carried
    // as an annotation only, no heuristic term reads it.
    bool delayed_effect = false;

    bool operator==(const ActionSpec&) const = default;
};

enum class EventKind { career, relationship };

inline std::string_view to_string(EventKind k) {
    return k == EventKind::career ? "career" : "relationship";
}

struct EventStep {
    std::int64_t xp_threshold = 0;
    RewardBundle reward;

    bool operator==(const EventStep&) const = default;
};

struct EventSpec {
    std::string id;
    EventKind kind = EventKind::career;
    std::string owner_id;
    std::int64_t time_limit = 0;
    std::vector<std::string> action_ids;
    std::vector<EventStep> steps;
    RequirementSet start_requires;

    bool operator==(const EventSpec&) const = default;
};

struct ObjectUnlock {
    std::string object_id;
    std::int64_t unlock_level = 1;
    std::int64_t price_rho = 0;

    bool operator==(const ObjectUnlock&) const = default;
};

struct CareerSpec {
    std::string id;
    std::int64_t max_level = 1;
    // Entry i is the cumulative career XP at which level i+1 is completed,
    // i.e. the Sim reaches level i+2 (capped at max_level).
    std::vector<std::int64_t> xp_per_level;
    std::map<std::int64_t, std::vector<std::string>> events_by_level;
    std::vector<std::string> craft_items;
    std::vector<ObjectUnlock> object_unlocks;

    bool operator==(const CareerSpec&) const = default;
};

struct RelationshipCategorySpec {
    std::string id;
    std::vector<std::string> event_chain;

    bool operator==(const RelationshipCategorySpec&) const = default;
};

struct ObjectSpec {
    std::string id;
    std::vector<std::string> unlocked_action_ids;

    bool operator==(const ObjectSpec&) const = default;
};

struct TuningConfig {
    int schema_version = kSchemaVersion;
    std::string build_id;
    std::vector<ResourceSpec> resources;
    std::vector<ActionSpec> actions;
    std::vector<EventSpec> events;
    std::vector<CareerSpec> careers;
    std::vector<RelationshipCategorySpec> relationships;
    std::vector<ObjectSpec> objects;

    bool operator==(const TuningConfig&) const = default;
};

namespace detail {
template <class T>
T* find_by_id(std::vector<T>& items, std::string_view id) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
    return it == items.end() ? nullptr : &*it;
}
template <class T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
    return it == items.end() ? nullptr : &*it;
}
}  // namespace detail

inline const ResourceSpec* find_resource(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.resources, id);
}
inline const ActionSpec* find_action(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.actions, id);
}
inline ActionSpec* find_action(TuningConfig& c, std::string_view id) { return detail::find_by_id(c.actions, id); }
inline const EventSpec* find_event(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.events, id);
}
inline EventSpec* find_event(TuningConfig& c, std::string_view id) { return detail::find_by_id(c.events, id); }
inline const CareerSpec* find_career(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.careers, id);
}
inline CareerSpec* find_career(TuningConfig& c, std::string_view id) { return detail::find_by_id(c.careers, id); }
inline const RelationshipCategorySpec* find_category(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.relationships, id);
}
inline const ObjectSpec* find_object(const TuningConfig& c, std::string_view id) {
    return detail::find_by_id(c.objects, id);
}

}  // namespace playtest
