#pragma once

// JSON reader/writer for tuning files. The reader is strict: unknown keys,
// missing required keys and wrong types are SchemaErrors. docs/tuning-schema.md
// lists which keys are optional.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "playtest/error.hpp"
#include "playtest/tuning.hpp"

namespace playtest {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte_offset) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min(byte_offset, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

// Parses JSON text, mapping parser failures to SyntaxError with a location.
inline json parse_json_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is the 1-based offset of the offending character.
        auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw SyntaxError(what, line, column);
    }
}

inline std::string type_name(const json& j) { return j.type_name(); }

// Tracks which keys of one JSON object were consumed so leftovers can be
// reported as schema errors.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw SchemaError(path_ + ": expected object, got " + type_name(obj_));
        }
    }

    const std::string& path() const { return path_; }
    std::string sub(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

    const json* find(std::string_view key) {
        auto it = obj_.find(std::string(key));
        if (it == obj_.end()) return nullptr;
        seen_.insert(std::string(key));
        return &*it;
    }

    const json& at(std::string_view key) {
        const json* j = find(key);
        if (j == nullptr) throw SchemaError(path_ + ": missing required field '" + std::string(key) + "'");
        return *j;
    }

    void finish() const {
        std::vector<std::string> extra;
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) extra.push_back(it.key());
        }
        if (!extra.empty()) {
            std::string msg = (path_.empty() ? std::string("document") : path_) + ": unknown field(s): ";
            for (std::size_t i = 0; i < extra.size(); ++i) msg += (i ? ", " : "") + extra[i];
            throw SchemaError(msg);
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::int64_t as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError(path + ": expected integer, got " + type_name(j));
    return j.get<std::int64_t>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path + ": expected string, got " + type_name(j));
    return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw SchemaError(path + ": expected boolean, got " + type_name(j));
    return j.get<bool>();
}

inline std::vector<std::string> as_string_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path + ": expected array, got " + type_name(j));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Quantities as_quantities(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + ": expected object, got " + type_name(j));
    Quantities out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = as_int(it.value(), path + "." + it.key());
    return out;
}

inline std::optional<std::string> as_optional_string(const json* j, const std::string& path) {
    if (j == nullptr || j->is_null()) return std::nullopt;
    return as_string(*j, path);
}

inline Rational read_rational(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Rational q;
    q.num = as_int(r.at("num"), r.sub("num"));
    q.den = as_int(r.at("den"), r.sub("den"));
    r.finish();
    return q;
}

inline RewardBundle read_reward(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    RewardBundle b;
    if (auto* v = r.find("career_xp")) b.career_xp = as_int(*v, r.sub("career_xp"));
    if (auto* v = r.find("event_xp")) b.event_xp = as_int(*v, r.sub("event_xp"));
    if (auto* v = r.find("relationship_xp")) b.relationship_xp = as_int(*v, r.sub("relationship_xp"));
    if (auto* v = r.find("resources")) b.resources = as_quantities(*v, r.sub("resources"));
    if (auto* v = r.find("items")) b.items = as_quantities(*v, r.sub("items"));
    r.finish();
    return b;
}

inline RequirementSet read_requirements(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    RequirementSet q;
    q.career = as_optional_string(r.find("career"), r.sub("career"));
    if (auto* v = r.find("min_level")) q.min_level = as_int(*v, r.sub("min_level"));
    q.owned_object = as_optional_string(r.find("owned_object"), r.sub("owned_object"));
    if (auto* v = r.find("during_event")) q.during_event = as_bool(*v, r.sub("during_event"));
    r.finish();
    return q;
}

template <class Fn>
auto read_list(const json& j, const std::string& path, Fn&& read_one) {
    if (!j.is_array()) throw SchemaError(path + ": expected array, got " + type_name(j));
    std::vector<decltype(read_one(j[0], path))> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_one(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline ResourceSpec read_resource(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ResourceSpec s;
    s.id = as_string(r.at("id"), r.sub("id"));
    s.capacity = as_int(r.at("capacity"), r.sub("capacity"));
    s.regen_rate = read_rational(r.at("regen_rate"), r.sub("regen_rate"));
    s.initial = as_int(r.at("initial"), r.sub("initial"));
    r.finish();
    return s;
}

inline ActionSpec read_action(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ActionSpec a;
    a.id = as_string(r.at("id"), r.sub("id"));
    a.duration = as_int(r.at("duration"), r.sub("duration"));
    a.cooldown = as_int(r.at("cooldown"), r.sub("cooldown"));
    if (auto* v = r.find("costs")) a.costs = as_quantities(*v, r.sub("costs"));
    if (auto* v = r.find("consumes_items")) a.consumes_items = as_quantities(*v, r.sub("consumes_items"));
    if (auto* v = r.find("rewards")) a.rewards = read_reward(*v, r.sub("rewards"));
    if (auto* v = r.find("requires")) a.requirements = read_requirements(*v, r.sub("requires"));
    if (auto* v = r.find("category_tag")) a.category_tag = as_string(*v, r.sub("category_tag"));
    if (auto* v = r.find("filler")) a.filler = as_bool(*v, r.sub("filler"));
    if (auto* v = r.find("delayed_effect")) a.delayed_effect = as_bool(*v, r.sub("delayed_effect"));
    r.finish();
    return a;
}

inline EventKind read_event_kind(const json& j, const std::string& path) {
    auto s = as_string(j, path);
    if (s == "career") return EventKind::career;
    if (s == "relationship") return EventKind::relationship;
    throw SchemaError(path + ": expected \"career\" or \"relationship\", got \"" + s + "\"");
}

inline EventStep read_step(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    EventStep s;
    s.xp_threshold = as_int(r.at("xp_threshold"), r.sub("xp_threshold"));
    if (auto* v = r.find("reward")) s.reward = read_reward(*v, r.sub("reward"));
    r.finish();
    return s;
}

inline EventSpec read_event(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    EventSpec e;
    e.id = as_string(r.at("id"), r.sub("id"));
    e.kind = read_event_kind(r.at("kind"), r.sub("kind"));
    e.owner_id = as_string(r.at("owner_id"), r.sub("owner_id"));
    e.time_limit = as_int(r.at("time_limit"), r.sub("time_limit"));
    e.action_ids = as_string_list(r.at("action_ids"), r.sub("action_ids"));
    e.steps = read_list(r.at("steps"), r.sub("steps"), read_step);
    if (auto* v = r.find("start_requires")) e.start_requires = read_requirements(*v, r.sub("start_requires"));
    r.finish();
    return e;
}

inline ObjectUnlock read_unlock(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ObjectUnlock u;
    u.object_id = as_string(r.at("object_id"), r.sub("object_id"));
    u.unlock_level = as_int(r.at("unlock_level"), r.sub("unlock_level"));
    u.price_rho = as_int(r.at("price_rho"), r.sub("price_rho"));
    r.finish();
    return u;
}

inline CareerSpec read_career(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    CareerSpec c;
    c.id = as_string(r.at("id"), r.sub("id"));
    c.max_level = as_int(r.at("max_level"), r.sub("max_level"));
    {
        const json& xs = r.at("xp_per_level");
        const std::string p = r.sub("xp_per_level");
        if (!xs.is_array()) throw SchemaError(p + ": expected array, got " + type_name(xs));
        for (std::size_t i = 0; i < xs.size(); ++i) c.xp_per_level.push_back(as_int(xs[i], p + "[" + std::to_string(i) + "]"));
    }
    if (auto* v = r.find("events_by_level")) {
        const std::string p = r.sub("events_by_level");
        if (!v->is_object()) throw SchemaError(p + ": expected object, got " + type_name(*v));
        for (auto it = v->begin(); it != v->end(); ++it) {
            std::int64_t level = 0;
            std::istringstream ks(it.key());
            if (!(ks >> level) || !ks.eof()) throw SchemaError(p + ": level key '" + it.key() + "' is not an integer");
            c.events_by_level[level] = as_string_list(it.value(), p + "." + it.key());
        }
    }
    if (auto* v = r.find("craft_items")) c.craft_items = as_string_list(*v, r.sub("craft_items"));
    if (auto* v = r.find("object_unlocks")) c.object_unlocks = read_list(*v, r.sub("object_unlocks"), read_unlock);
    r.finish();
    return c;
}

inline RelationshipCategorySpec read_category(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    RelationshipCategorySpec c;
    c.id = as_string(r.at("id"), r.sub("id"));
    c.event_chain = as_string_list(r.at("event_chain"), r.sub("event_chain"));
    r.finish();
    return c;
}

inline ObjectSpec read_object(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ObjectSpec o;
    o.id = as_string(r.at("id"), r.sub("id"));
    o.unlocked_action_ids = as_string_list(r.at("unlocked_action_ids"), r.sub("unlocked_action_ids"));
    r.finish();
    return o;
}

inline ordered_json write_quantities(const Quantities& q) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : q) j[k] = v;
    return j;
}

inline ordered_json write_reward(const RewardBundle& b) {
    ordered_json j;
    j["career_xp"] = b.career_xp;
    j["event_xp"] = b.event_xp;
    j["relationship_xp"] = b.relationship_xp;
    j["resources"] = write_quantities(b.resources);
    j["items"] = write_quantities(b.items);
    return j;
}

inline ordered_json write_requirements(const RequirementSet& q) {
    ordered_json j = ordered_json::object();
    if (q.career) j["career"] = *q.career;
    j["min_level"] = q.min_level;
    if (q.owned_object) j["owned_object"] = *q.owned_object;
    j["during_event"] = q.during_event;
    return j;
}

}  // namespace detail

/// Reads a tuning document checking syntax and schema only. References and
/// value invariants are left to validate().
inline TuningConfig parse_tuning_unchecked(std::string_view text) {
    using namespace detail;
    const json doc = parse_json_text(text);
    if (!doc.is_object()) throw SchemaError("document: expected object, got " + type_name(doc));

    static const char* const kRequired[] = {"build_id", "resources", "actions", "events",
                                            "careers",  "relationships", "objects"};
    std::string missing;
    for (const char* key : kRequired) {
        if (!doc.contains(key)) missing += (missing.empty() ? "" : ", ") + std::string(key);
    }
    if (!missing.empty()) throw SchemaError("document: missing required top-level field(s): " + missing);

    ObjectReader r(doc, "");
    TuningConfig c;
    if (auto* v = r.find("schema_version")) {
        c.schema_version = static_cast<int>(as_int(*v, "schema_version"));
        if (c.schema_version != kSchemaVersion) {
            throw SchemaError("schema_version: unsupported version " + std::to_string(c.schema_version) +
                              " (expected " + std::to_string(kSchemaVersion) + ")");
        }
    }
    c.build_id = as_string(r.at("build_id"), "build_id");
    c.resources = read_list(r.at("resources"), "resources", read_resource);
    c.actions = read_list(r.at("actions"), "actions", read_action);
    c.events = read_list(r.at("events"), "events", read_event);
    c.careers = read_list(r.at("careers"), "careers", read_career);
    c.relationships = read_list(r.at("relationships"), "relationships", read_category);
    c.objects = read_list(r.at("objects"), "objects", read_object);
    r.finish();
    return c;
}

inline ordered_json to_json(const TuningConfig& c) {
    using namespace detail;
    ordered_json doc;
    doc["schema_version"] = c.schema_version;
    doc["build_id"] = c.build_id;

    doc["resources"] = ordered_json::array();
    for (const auto& s : c.resources) {
        ordered_json j;
        j["id"] = s.id;
        j["capacity"] = s.capacity;
        j["regen_rate"] = {{"num", s.regen_rate.num}, {"den", s.regen_rate.den}};
        j["initial"] = s.initial;
        doc["resources"].push_back(std::move(j));
    }

    doc["actions"] = ordered_json::array();
    for (const auto& a : c.actions) {
        ordered_json j;
        j["id"] = a.id;
        j["costs"] = write_quantities(a.costs);
        j["consumes_items"] = write_quantities(a.consumes_items);
        j["duration"] = a.duration;
        j["cooldown"] = a.cooldown;
        j["rewards"] = write_reward(a.rewards);
        j["requires"] = write_requirements(a.requirements);
        j["category_tag"] = a.category_tag;
        if (a.filler) j["filler"] = true;
        if (a.delayed_effect) j["delayed_effect"] = true;
        doc["actions"].push_back(std::move(j));
    }

    doc["events"] = ordered_json::array();
    for (const auto& e : c.events) {
        ordered_json j;
        j["id"] = e.id;
        j["kind"] = std::string(to_string(e.kind));
        j["owner_id"] = e.owner_id;
        j["time_limit"] = e.time_limit;
        j["action_ids"] = e.action_ids;
        j["steps"] = ordered_json::array();
        for (const auto& s : e.steps) {
            j["steps"].push_back({{"xp_threshold", s.xp_threshold}, {"reward", write_reward(s.reward)}});
        }
        j["start_requires"] = write_requirements(e.start_requires);
        doc["events"].push_back(std::move(j));
    }

    doc["careers"] = ordered_json::array();
    for (const auto& k : c.careers) {
        ordered_json j;
        j["id"] = k.id;
        j["max_level"] = k.max_level;
        j["xp_per_level"] = k.xp_per_level;
        ordered_json by_level = ordered_json::object();
        for (const auto& [level, ids] : k.events_by_level) by_level[std::to_string(level)] = ids;
        j["events_by_level"] = std::move(by_level);
        j["craft_items"] = k.craft_items;
        j["object_unlocks"] = ordered_json::array();
        for (const auto& u : k.object_unlocks) {
            j["object_unlocks"].push_back(
                {{"object_id", u.object_id}, {"unlock_level", u.unlock_level}, {"price_rho", u.price_rho}});
        }
        doc["careers"].push_back(std::move(j));
    }

    doc["relationships"] = ordered_json::array();
    for (const auto& r : c.relationships) {
        doc["relationships"].push_back({{"id", r.id}, {"event_chain", r.event_chain}});
    }

    doc["objects"] = ordered_json::array();
    for (const auto& o : c.objects) {
        doc["objects"].push_back({{"id", o.id}, {"unlocked_action_ids", o.unlocked_action_ids}});
    }
    return doc;
}

inline std::string serialize_tuning(const TuningConfig& c) { return to_json(c).dump(2) + "\n"; }

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace playtest
