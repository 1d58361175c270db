#pragma once

// Static checks over a TuningConfig: invariant validation, build diffs and the
// event step-curve linter.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "playtest/error.hpp"
#include "playtest/tuning.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

enum class Severity { error, warning };

inline std::string_view to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

struct Diagnostic {
    Severity severity = Severity::error;
    std::string entity;
    std::string rule;
    std::string message;
    // Set for dangling-reference diagnostics.
    std::string target;

    bool operator==(const Diagnostic&) const = default;
};

inline std::string format_diagnostic(const Diagnostic& d) {
    return std::string(to_string(d.severity)) + ": " + d.entity + ": " + d.message + " [" + d.rule + "]";
}

inline ordered_json to_json(const Diagnostic& d) {
    ordered_json j;
    j["severity"] = std::string(to_string(d.severity));
    j["entity"] = d.entity;
    j["rule"] = d.rule;
    j["message"] = d.message;
    return j;
}

namespace detail {

class DiagnosticSink {
public:
    void error(const std::string& entity, const std::string& rule, const std::string& message) {
        out.push_back({Severity::error, entity, rule, message, {}});
    }
    void dangling(const std::string& site, const std::string& target, const std::string& what) {
        out.push_back({Severity::error, site, "dangling-reference",
                       what + " '" + target + "' is not declared", target});
    }
    void non_negative(const std::string& entity, const std::string& field, std::int64_t v) {
        if (v < 0) error(entity, "negative-value", field + " must be >= 0 (got " + std::to_string(v) + ")");
    }

    std::vector<Diagnostic> out;
};

template <class T>
void check_unique(DiagnosticSink& sink, const std::vector<T>& items, const std::string& kind) {
    std::set<std::string> seen;
    for (const auto& x : items) {
        if (!seen.insert(x.id).second) sink.error(x.id, "duplicate-id", kind + " id declared more than once");
    }
}

inline void check_reward(DiagnosticSink& sink, const TuningConfig& c, const std::string& entity,
                         const RewardBundle& r) {
    sink.non_negative(entity, "career_xp", r.career_xp);
    sink.non_negative(entity, "event_xp", r.event_xp);
    sink.non_negative(entity, "relationship_xp", r.relationship_xp);
    for (const auto& [id, v] : r.resources) {
        if (!find_resource(c, id)) sink.dangling(entity, id, "reward resource");
        sink.non_negative(entity, "resources." + id, v);
    }
    for (const auto& [id, v] : r.items) sink.non_negative(entity, "items." + id, v);
}

inline void check_requirements(DiagnosticSink& sink, const TuningConfig& c, const std::string& entity,
                               const RequirementSet& q) {
    if (q.career && !find_career(c, *q.career)) sink.dangling(entity, *q.career, "required career");
    if (q.owned_object && !find_object(c, *q.owned_object)) sink.dangling(entity, *q.owned_object, "required object");
    sink.non_negative(entity, "min_level", q.min_level);
}

inline bool strictly_increasing(const std::vector<std::int64_t>& xs) {
    return std::adjacent_find(xs.begin(), xs.end(), [](auto a, auto b) { return b <= a; }) == xs.end();
}

}  // namespace detail

/// Checks every declared invariant. Empty result iff the config is valid.
inline std::vector<Diagnostic> validate(const TuningConfig& c) {
    detail::DiagnosticSink sink;

    detail::check_unique(sink, c.resources, "resource");
    detail::check_unique(sink, c.actions, "action");
    detail::check_unique(sink, c.events, "event");
    detail::check_unique(sink, c.careers, "career");
    detail::check_unique(sink, c.relationships, "relationship category");
    detail::check_unique(sink, c.objects, "object");

    for (const auto& r : c.resources) {
        sink.non_negative(r.id, "capacity", r.capacity);
        sink.non_negative(r.id, "initial", r.initial);
        if (r.regen_rate.num < 0) sink.error(r.id, "negative-value", "regen_rate must be >= 0");
        if (r.regen_rate.den <= 0) sink.error(r.id, "regen-rate-denominator", "regen_rate.den must be > 0");
        if (r.initial > r.capacity) sink.error(r.id, "initial-exceeds-capacity", "initial exceeds capacity");
    }

    for (const auto& a : c.actions) {
        sink.non_negative(a.id, "duration", a.duration);
        sink.non_negative(a.id, "cooldown", a.cooldown);
        for (const auto& [id, v] : a.costs) {
            if (!find_resource(c, id)) sink.dangling(a.id, id, "cost resource");
            sink.non_negative(a.id, "costs." + id, v);
        }
        for (const auto& [id, v] : a.consumes_items) sink.non_negative(a.id, "consumes_items." + id, v);
        detail::check_reward(sink, c, a.id, a.rewards);
        detail::check_requirements(sink, c, a.id, a.requirements);
    }

    for (const auto& e : c.events) {
        if (e.kind == EventKind::career && !find_career(c, e.owner_id)) {
            sink.dangling(e.id, e.owner_id, "owning career");
        }
        if (e.kind == EventKind::relationship && !find_category(c, e.owner_id)) {
            sink.dangling(e.id, e.owner_id, "owning relationship category");
        }
        if (e.time_limit <= 0) sink.error(e.id, "time-limit-positive", "time_limit must be > 0");
        if (e.steps.empty()) sink.error(e.id, "steps-non-empty", "event declares no steps");
        std::vector<std::int64_t> thresholds;
        for (const auto& s : e.steps) {
            thresholds.push_back(s.xp_threshold);
            if (s.xp_threshold <= 0) sink.error(e.id, "threshold-positive", "xp thresholds must be > 0");
            detail::check_reward(sink, c, e.id, s.reward);
        }
        if (!detail::strictly_increasing(thresholds)) {
            sink.error(e.id, "thresholds-increasing", "thresholds not strictly increasing");
        }
        for (const auto& id : e.action_ids) {
            const ActionSpec* a = find_action(c, id);
            if (!a) {
                sink.dangling(e.id, id, "event action");
            } else if (a->rewards.event_xp <= 0 && !a->filler) {
                sink.error(e.id, "event-action-reward",
                           "action '" + id + "' grants no event_xp and is not marked filler");
            }
        }
        detail::check_requirements(sink, c, e.id, e.start_requires);
    }

    for (const auto& k : c.careers) {
        if (k.max_level < 1) sink.error(k.id, "max-level-positive", "max_level must be >= 1");
        if (static_cast<std::int64_t>(k.xp_per_level.size()) != k.max_level) {
            sink.error(k.id, "xp-per-level-length", "xp_per_level must have max_level entries");
        }
        for (auto x : k.xp_per_level) {
            if (x <= 0) sink.error(k.id, "threshold-positive", "xp_per_level entries must be > 0");
        }
        if (!detail::strictly_increasing(k.xp_per_level)) {
            sink.error(k.id, "xp-per-level-increasing", "xp_per_level not strictly increasing");
        }
        for (const auto& [level, ids] : k.events_by_level) {
            if (level < 1 || level > k.max_level) {
                sink.error(k.id, "event-level-range", "events_by_level key " + std::to_string(level) + " out of range");
            }
            for (const auto& id : ids) {
                const EventSpec* e = find_event(c, id);
                if (!e) {
                    sink.dangling(k.id, id, "career event");
                } else if (e->kind != EventKind::career || e->owner_id != k.id) {
                    sink.error(k.id, "career-event-owner", "event '" + id + "' is not a career event of this career");
                }
            }
        }
        for (const auto& u : k.object_unlocks) {
            if (!find_object(c, u.object_id)) sink.dangling(k.id, u.object_id, "unlocked object");
            if (u.unlock_level < 1 || u.unlock_level > k.max_level) {
                sink.error(k.id, "unlock-level-range", "unlock_level of '" + u.object_id + "' outside 1..max_level");
            }
            sink.non_negative(k.id, "price_rho", u.price_rho);
        }
    }

    for (const auto& r : c.relationships) {
        if (r.event_chain.empty()) sink.error(r.id, "chain-non-empty", "event_chain is empty");
        for (const auto& id : r.event_chain) {
            const EventSpec* e = find_event(c, id);
            if (!e) {
                sink.dangling(r.id, id, "chain event");
            } else if (e->kind != EventKind::relationship || e->owner_id != r.id) {
                sink.error(r.id, "chain-event-owner", "event '" + id + "' is not a relationship event of this category");
            }
        }
    }

    for (const auto& o : c.objects) {
        for (const auto& id : o.unlocked_action_ids) {
            const ActionSpec* a = find_action(c, id);
            if (!a) {
                sink.dangling(o.id, id, "unlocked action");
            } else if (a->requirements.owned_object != o.id) {
                sink.error(o.id, "object-action-requirement", "action '" + id + "' does not require this object");
            }
        }
    }

    return sink.out;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

/// Full parse: syntax, schema, reference resolution and invariants.
inline TuningConfig parse_tuning(std::string_view text) {
    TuningConfig c = parse_tuning_unchecked(text);
    const auto diags = validate(c);
    for (const auto& d : diags) {
        if (d.rule == "dangling-reference") throw DanglingReference(d.entity, d.target);
    }
    for (const auto& d : diags) {
        if (d.severity == Severity::error) throw InvariantViolation(d.rule, d.entity + ": " + d.message);
    }
    return c;
}

inline TuningConfig load_tuning(const std::filesystem::path& path) { return parse_tuning(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Build diff
// ---------------------------------------------------------------------------

struct FieldChange {
    std::string kind;    // build, resource, action, event, career, relationship, object
    std::string entity;  // entity id ("" for build-level fields)
    std::string field;   // dotted path; empty when the whole entity was added/removed
    json old_value;      // null when added
    json new_value;      // null when removed

    bool added() const { return old_value.is_null() && !new_value.is_null(); }
    bool removed() const { return new_value.is_null() && !old_value.is_null(); }

    bool operator==(const FieldChange&) const = default;
};

struct BuildDiff {
    std::vector<FieldChange> entries;

    bool empty() const { return entries.empty(); }
};

namespace detail {

inline void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
    if (j.is_object() && !j.empty()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
        return;
    }
    if (j.is_array() && !j.empty() &&
        std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_object(); })) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
        return;
    }
    out[prefix] = j;
}

inline void diff_entity_lists(const json& a, const json& b, const std::string& kind, std::vector<FieldChange>& out) {
    std::map<std::string, json> left;
    std::map<std::string, json> right;
    for (const auto& x : a) left[x.at("id").get<std::string>()] = x;
    for (const auto& x : b) right[x.at("id").get<std::string>()] = x;

    std::set<std::string> ids;
    for (const auto& [id, _] : left) ids.insert(id);
    for (const auto& [id, _] : right) ids.insert(id);

    for (const auto& id : ids) {
        auto l = left.find(id);
        auto r = right.find(id);
        if (l == left.end()) {
            out.push_back({kind, id, "", json(), r->second});
            continue;
        }
        if (r == right.end()) {
            out.push_back({kind, id, "", l->second, json()});
            continue;
        }
        std::map<std::string, json> lf;
        std::map<std::string, json> rf;
        flatten(l->second, "", lf);
        flatten(r->second, "", rf);
        std::set<std::string> fields;
        for (const auto& [f, _] : lf) fields.insert(f);
        for (const auto& [f, _] : rf) fields.insert(f);
        for (const auto& f : fields) {
            json ov = lf.count(f) ? lf[f] : json();
            json nv = rf.count(f) ? rf[f] : json();
            if (ov != nv) out.push_back({kind, id, f, ov, nv});
        }
    }
}

}  // namespace detail

/// Structural diff between two builds, ordered by (kind, entity, field).
inline BuildDiff diff_builds(const TuningConfig& a, const TuningConfig& b) {
    const json ja = json::parse(to_json(a).dump());
    const json jb = json::parse(to_json(b).dump());
    BuildDiff d;
    for (const char* f : {"build_id", "schema_version"}) {
        if (ja.at(f) != jb.at(f)) d.entries.push_back({"build", "", f, ja.at(f), jb.at(f)});
    }
    const std::pair<const char*, const char*> lists[] = {
        {"resources", "resource"}, {"actions", "action"},             {"events", "event"},
        {"careers", "career"},     {"relationships", "relationship"}, {"objects", "object"}};
    for (const auto& [key, kind] : lists) detail::diff_entity_lists(ja.at(key), jb.at(key), kind, d.entries);
    std::sort(d.entries.begin(), d.entries.end(), [](const FieldChange& x, const FieldChange& y) {
        return std::tie(x.kind, x.entity, x.field) < std::tie(y.kind, y.entity, y.field);
    });
    return d;
}

inline std::string format_change(const FieldChange& c) {
    const std::string name = c.entity.empty() ? c.kind : c.kind + " " + c.entity;
    if (c.field.empty() && c.added()) return "+ " + name + " added";
    if (c.field.empty() && c.removed()) return "- " + name + " removed";
    return "~ " + name + "." + c.field + ": " + c.old_value.dump() + " -> " + c.new_value.dump();
}

inline ordered_json to_json(const BuildDiff& d) {
    ordered_json out = ordered_json::array();
    for (const auto& c : d.entries) {
        ordered_json j;
        j["change"] = c.added() ? "added" : c.removed() ? "removed" : "changed";
        j["kind"] = c.kind;
        j["entity"] = c.entity;
        j["field"] = c.field;
        j["old"] = ordered_json::parse(c.old_value.dump());
        j["new"] = ordered_json::parse(c.new_value.dump());
        out.push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Event step curves
// ---------------------------------------------------------------------------

struct CurvePoint {
    std::int64_t xp_threshold = 0;
    std::int64_t cumulative_reward = 0;

    bool operator==(const CurvePoint&) const = default;
};

/// (threshold, cumulative career XP paid up to and including that step).
inline std::vector<CurvePoint> event_step_curve(const TuningConfig& c, std::string_view event_id) {
    const EventSpec* e = find_event(c, event_id);
    if (!e) throw UnknownEvent("unknown event '" + std::string(event_id) + "'");
    std::vector<CurvePoint> out;
    std::int64_t total = 0;
    for (const auto& s : e->steps) {
        total += s.reward.career_xp;
        out.push_back({s.xp_threshold, total});
    }
    return out;
}

inline constexpr double kDefaultAnomalyRatio = 0.25;

/// Flags event steps after the first whose marginal reward per marginal XP is
/// below anomaly_ratio times the first step's ratio. A step that asks for more
/// XP and pays nothing extra is always flagged. Career events are measured in
/// career XP, relationship events in relationship XP.
inline std::vector<Diagnostic> flag_step_anomalies(const TuningConfig& c, double anomaly_ratio = kDefaultAnomalyRatio) {
    std::vector<Diagnostic> out;
    for (const auto& e : c.events) {
        if (e.steps.size() < 2 || e.steps.front().xp_threshold <= 0) continue;
        auto value = [&](const EventStep& s) {
            return e.kind == EventKind::career ? s.reward.career_xp : s.reward.relationship_xp;
        };
        const double base_ratio = static_cast<double>(value(e.steps[0])) / static_cast<double>(e.steps[0].xp_threshold);
        for (std::size_t i = 1; i < e.steps.size(); ++i) {
            const std::int64_t d_xp = e.steps[i].xp_threshold - e.steps[i - 1].xp_threshold;
            const std::int64_t d_reward = value(e.steps[i]);
            if (d_xp <= 0) continue;  // reported by validate()
            const double ratio = static_cast<double>(d_reward) / static_cast<double>(d_xp);
            if (d_reward == 0 || ratio < anomaly_ratio * base_ratio) {
                out.push_back({Severity::warning, e.id, "step-reward-anomaly",
                               "step " + std::to_string(i + 1) + " needs " + std::to_string(d_xp) +
                                   " more event XP for " + std::to_string(d_reward) + " extra reward",
                               {}});
            }
        }
    }
    return out;
}

}  // namespace playtest
