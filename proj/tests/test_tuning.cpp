#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "playtest/tuning_analysis.hpp"
#include "playtest/tuning_io.hpp"
#include "support.hpp"

using namespace playtest;
using namespace playtest::testing;

namespace {

const std::vector<std::string> kFixtures = {
    "desk_base.json",       "build_A_fixture.json", "build_B_fixture.json", "bugged_event.json",
    "romance_outlier.json", "desk_objects.json",    "variance_career.json",
};

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
    for (const auto& d : ds) {
        if (d.rule == rule) return true;
    }
    return false;
}

// A clean config touching every entity kind, used as the base for mutations.
TuningConfig small_valid() {
    TuningConfig c = config("small");
    c.resources.push_back(resource("energy", 10, 1, 2, 10));
    ActionSpec work = action("work", 2, 1);
    work.costs["energy"] = 2;
    work.rewards.career_xp = 10;
    work.rewards.event_xp = 10;
    work.requirements.career = "job";
    c.actions.push_back(work);
    ActionSpec chat = action("chat");
    chat.rewards.event_xp = 5;
    chat.requirements.during_event = true;
    chat.category_tag = "friendship";
    c.actions.push_back(chat);
    ActionSpec tool = action("tool_use");
    tool.rewards.career_xp = 20;
    tool.requirements.career = "job";
    tool.requirements.owned_object = "tool";
    c.actions.push_back(tool);
    c.events.push_back(event("shift", EventKind::career, "job", 60, {"work"}, {{20, 10}, {40, 20}}));
    c.events.push_back(event("friendship_1", EventKind::relationship, "friendship", 60, {"chat"}, {{10, 0}}));
    CareerSpec job = career("job", {30, 70, 120});
    job.events_by_level[1] = {"shift"};
    job.object_unlocks.push_back({"tool", 2, 100});
    c.careers.push_back(job);
    c.relationships.push_back({"friendship", {"friendship_1"}});
    c.objects.push_back({"tool", {"tool_use"}});
    return c;
}

}  // namespace

// --- parsing ---------------------------------------------------------------

TEST(Parse, DeskBaseShape) {
    const TuningConfig c = fixture("desk_base.json");
    EXPECT_EQ(c.schema_version, 1);
    EXPECT_EQ(c.resources.size(), 1u);
    EXPECT_EQ(c.careers.size(), 4u);
    EXPECT_EQ(c.relationships.size(), 3u);
    for (const auto& r : c.relationships) EXPECT_EQ(r.event_chain.size(), 5u);
}

TEST(Parse, EmptyDocumentListsRequiredFields) {
    try {
        parse_tuning("{}");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        const std::string what = e.what();
        for (const char* key : {"build_id", "resources", "actions", "events", "careers", "relationships", "objects"}) {
            EXPECT_NE(what.find(key), std::string::npos) << key;
        }
    }
}

TEST(Parse, DanglingEventAction) {
    TuningConfig c = small_valid();
    c.events.push_back(event("ev1", EventKind::career, "job", 10, {"missing"}, {{10, 0}}));
    try {
        parse_tuning(serialize_tuning(c));
        FAIL() << "expected DanglingReference";
    } catch (const DanglingReference& e) {
        EXPECT_EQ(e.site(), "ev1");
        EXPECT_EQ(e.target(), "missing");
    }
}

TEST(Parse, SyntaxErrorCarriesPosition) {
    try {
        parse_tuning("{\n  \"build_id\": \"x\",\n  \"resources\": [,]\n}");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GT(e.column(), 0u);
    }
}

TEST(Parse, WrongTypeAndUnknownFieldAreSchemaErrors) {
    std::string text = serialize_tuning(small_valid());
    json j = json::parse(text);
    j["resources"][0]["capacity"] = "ten";
    EXPECT_THROW(parse_tuning(j.dump()), SchemaError);
    j = json::parse(text);
    j["actions"][0]["colour"] = "red";
    EXPECT_THROW(parse_tuning(j.dump()), SchemaError);
    j = json::parse(text);
    j["schema_version"] = 2;
    EXPECT_THROW(parse_tuning(j.dump()), SchemaError);
}

TEST(Parse, InvariantViolationNamesRule) {
    TuningConfig c = small_valid();
    c.events[0].time_limit = 0;
    try {
        parse_tuning(serialize_tuning(c));
        FAIL() << "expected InvariantViolation";
    } catch (const InvariantViolation& e) {
        EXPECT_EQ(e.rule(), "time-limit-positive");
    }
}

TEST(Parse, MissingFileIsIoError) { EXPECT_THROW(load_tuning(fixture_path("no_such_file.json")), IoError); }

TEST(RoundTrip, ShippedFixtures) {
    for (const auto& name : kFixtures) {
        const TuningConfig a = fixture(name);
        const TuningConfig b = parse_tuning(serialize_tuning(a));
        EXPECT_EQ(a, b) << name;
        EXPECT_EQ(serialize_tuning(a), serialize_tuning(b)) << name;
    }
}

TEST(RoundTrip, GeneratedConfigs) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const TuningConfig a = random_tiny_fixture(seed);
        EXPECT_EQ(a, parse_tuning(serialize_tuning(a))) << seed;
    }
    TuningConfig flags = small_valid();
    flags.actions[1].delayed_effect = true;
    flags.actions[0].filler = true;
    EXPECT_EQ(flags, parse_tuning_unchecked(serialize_tuning(flags)));
}

// --- validation --------------------------------------------------------------

TEST(Validate, ShippedFixturesAreClean) {
    for (const auto& name : kFixtures) {
        EXPECT_TRUE(validate(parse_tuning_unchecked(read_text_file(fixture_path(name)))).empty()) << name;
    }
    EXPECT_TRUE(validate(small_valid()).empty());
}

TEST(Validate, EqualThresholds) {
    TuningConfig c = small_valid();
    c.events[0].steps[1].xp_threshold = c.events[0].steps[0].xp_threshold;
    const auto ds = validate(c);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].entity, "shift");
    EXPECT_EQ(ds[0].message, "thresholds not strictly increasing");
}

TEST(Validate, DecreasingXpPerLevel) {
    TuningConfig c = small_valid();
    c.careers[0] = career("job", {100, 50});
    c.careers[0].events_by_level[1] = {"shift"};
    c.careers[0].object_unlocks.push_back({"tool", 2, 100});
    const auto ds = validate(c);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].message, "xp_per_level not strictly increasing");
}

// Each mutation breaks one declared invariant and must be reported under
// that rule.
TEST(Validate, MutationsNameTheirRule) {
    struct Mutation {
        std::string rule;
        std::function<void(TuningConfig&)> apply;
    };
    const std::vector<Mutation> mutations = {
        {"duplicate-id", [](TuningConfig& c) { c.actions.push_back(c.actions[0]); }},
        {"duplicate-id", [](TuningConfig& c) { c.resources.push_back(c.resources[0]); }},
        {"negative-value", [](TuningConfig& c) { c.actions[0].duration = -1; }},
        {"negative-value", [](TuningConfig& c) { c.actions[0].cooldown = -5; }},
        {"negative-value", [](TuningConfig& c) { c.actions[0].costs["energy"] = -1; }},
        {"negative-value", [](TuningConfig& c) { c.actions[0].rewards.career_xp = -3; }},
        {"negative-value", [](TuningConfig& c) { c.careers[0].object_unlocks[0].price_rho = -1; }},
        {"negative-value", [](TuningConfig& c) { c.resources[0].regen_rate.num = -1; }},
        {"regen-rate-denominator", [](TuningConfig& c) { c.resources[0].regen_rate.den = 0; }},
        {"initial-exceeds-capacity", [](TuningConfig& c) { c.resources[0].initial = 11; }},
        {"threshold-positive", [](TuningConfig& c) { c.events[0].steps[0].xp_threshold = 0; }},
        {"threshold-positive", [](TuningConfig& c) { c.careers[0].xp_per_level[0] = 0; }},
        {"time-limit-positive", [](TuningConfig& c) { c.events[0].time_limit = 0; }},
        {"steps-non-empty", [](TuningConfig& c) { c.events[0].steps.clear(); }},
        {"event-action-reward", [](TuningConfig& c) { c.actions[0].rewards.event_xp = 0; }},
        {"xp-per-level-length", [](TuningConfig& c) { c.careers[0].max_level = 4; }},
        {"max-level-positive", [](TuningConfig& c) { c.careers[0].max_level = 0; }},
        {"unlock-level-range", [](TuningConfig& c) { c.careers[0].object_unlocks[0].unlock_level = 9; }},
        {"event-level-range", [](TuningConfig& c) { c.careers[0].events_by_level[7] = {"shift"}; }},
        {"career-event-owner", [](TuningConfig& c) { c.careers[0].events_by_level[1] = {"friendship_1"}; }},
        {"chain-non-empty", [](TuningConfig& c) { c.relationships[0].event_chain.clear(); }},
        {"chain-event-owner", [](TuningConfig& c) { c.relationships[0].event_chain = {"shift"}; }},
        {"object-action-requirement", [](TuningConfig& c) { c.objects[0].unlocked_action_ids = {"work"}; }},
        {"dangling-reference", [](TuningConfig& c) { c.actions[0].costs["water"] = 1; }},
        {"dangling-reference", [](TuningConfig& c) { c.actions[0].requirements.career = "pilot"; }},
        {"dangling-reference", [](TuningConfig& c) { c.events[0].owner_id = "pilot"; }},
        {"dangling-reference", [](TuningConfig& c) { c.careers[0].object_unlocks[0].object_id = "ghost"; }},
        {"dangling-reference", [](TuningConfig& c) { c.relationships[0].event_chain.push_back("ghost_2"); }},
        {"dangling-reference", [](TuningConfig& c) { c.objects[0].unlocked_action_ids.push_back("ghost"); }},
    };
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        TuningConfig c = small_valid();
        mutations[i].apply(c);
        const auto ds = validate(c);
        EXPECT_TRUE(has_rule(ds, mutations[i].rule)) << "mutation " << i << " expected " << mutations[i].rule;
    }
}

TEST(Validate, FillerActionsMayGrantNoEventXp) {
    TuningConfig c = small_valid();
    c.actions[0].rewards.event_xp = 0;
    c.actions[0].filler = true;
    EXPECT_TRUE(validate(c).empty());
}

// --- build diff --------------------------------------------------------------

TEST(Diff, IdentityIsEmpty) {
    for (const auto& name : kFixtures) {
        const TuningConfig c = fixture(name);
        EXPECT_TRUE(diff_builds(c, c).empty()) << name;
    }
}

TEST(Diff, SingleCooldownEdit) {
    const TuningConfig a = fixture("desk_base.json");
    TuningConfig b = a;
    find_action(b, "brew")->cooldown = 30;
    const BuildDiff d = diff_builds(a, b);
    ASSERT_EQ(d.entries.size(), 1u);
    EXPECT_EQ(d.entries[0].kind, "action");
    EXPECT_EQ(d.entries[0].entity, "brew");
    EXPECT_EQ(d.entries[0].field, "cooldown");
    EXPECT_EQ(d.entries[0].old_value, 0);
    EXPECT_EQ(d.entries[0].new_value, 30);
    EXPECT_EQ(format_change(d.entries[0]), "~ action brew.cooldown: 0 -> 30");
}

TEST(Diff, BuildsDifferInRegenRate) {
    const BuildDiff d = diff_builds(fixture("build_A_fixture.json"), fixture("build_B_fixture.json"));
    ASSERT_FALSE(d.empty());
    bool regen = false;
    for (const auto& c : d.entries) {
        if (c.kind == "resource" && c.entity == "energy" && c.field.rfind("regen_rate", 0) == 0) regen = true;
    }
    EXPECT_TRUE(regen);
}

TEST(Diff, AddedAndRemovedEntities) {
    const TuningConfig a = small_valid();
    TuningConfig b = a;
    b.actions.push_back(action("nap"));
    const BuildDiff d = diff_builds(a, b);
    ASSERT_EQ(d.entries.size(), 1u);
    EXPECT_TRUE(d.entries[0].added());
    EXPECT_EQ(format_change(d.entries[0]), "+ action nap added");
    const BuildDiff back = diff_builds(b, a);
    ASSERT_EQ(back.entries.size(), 1u);
    EXPECT_TRUE(back.entries[0].removed());
}

TEST(Diff, SymmetricWithSwappedValues) {
    std::vector<TuningConfig> configs;
    for (const auto& name : kFixtures) configs.push_back(fixture(name));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) configs.push_back(random_tiny_fixture(seed));
    for (const auto& a : configs) {
        for (const auto& b : configs) {
            const auto ab = diff_builds(a, b).entries;
            const auto ba = diff_builds(b, a).entries;
            ASSERT_EQ(ab.size(), ba.size()) << a.build_id << " vs " << b.build_id;
            for (const auto& x : ab) {
                FieldChange swapped = x;
                std::swap(swapped.old_value, swapped.new_value);
                EXPECT_NE(std::find(ba.begin(), ba.end(), swapped), ba.end()) << format_change(x);
            }
        }
    }
}

// --- step curve and anomaly linter ----------------------------------------

namespace {

TuningConfig with_steps(std::vector<std::pair<std::int64_t, std::int64_t>> steps) {
    TuningConfig c = small_valid();
    c.events[0].steps.clear();
    for (auto [t, xp] : steps) {
        EventStep s;
        s.xp_threshold = t;
        s.reward.career_xp = xp;
        c.events[0].steps.push_back(s);
    }
    return c;
}

}  // namespace

TEST(StepCurve, DirectReadOff) {
    const auto curve = event_step_curve(with_steps({{100, 50}, {250, 0}}), "shift");
    EXPECT_EQ(curve, (std::vector<CurvePoint>{{100, 50}, {250, 50}}));
}

TEST(StepCurve, CumulativeSum) {
    const auto curve = event_step_curve(with_steps({{100, 50}, {200, 100}}), "shift");
    EXPECT_EQ(curve, (std::vector<CurvePoint>{{100, 50}, {200, 150}}));
}

TEST(StepCurve, UnknownEvent) { EXPECT_THROW(event_step_curve(small_valid(), "nope"), UnknownEvent); }

TEST(StepCurve, BuggedEventShape) {
    const auto curve = event_step_curve(fixture("bugged_event.json"), "rush_hour");
    ASSERT_EQ(curve.size(), 2u);
    const auto marginal_threshold = curve[1].xp_threshold - curve[0].xp_threshold;
    EXPECT_EQ(curve[1].cumulative_reward - curve[0].cumulative_reward, 0);
    EXPECT_GT(marginal_threshold, curve[0].xp_threshold);
}

TEST(StepCurve, MonotoneOnEveryEvent) {
    for (const auto& name : kFixtures) {
        const TuningConfig c = fixture(name);
        for (const auto& e : c.events) {
            const auto curve = event_step_curve(c, e.id);
            for (std::size_t i = 1; i < curve.size(); ++i) {
                EXPECT_GE(curve[i].xp_threshold, curve[i - 1].xp_threshold) << e.id;
                EXPECT_GE(curve[i].cumulative_reward, curve[i - 1].cumulative_reward) << e.id;
            }
        }
    }
}

TEST(Anomalies, BuggedEventFlagged) {
    const auto ds = flag_step_anomalies(fixture("bugged_event.json"));
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].entity, "rush_hour");
    EXPECT_EQ(ds[0].severity, Severity::warning);
}

TEST(Anomalies, LinearStepsNotFlagged) {
    EXPECT_TRUE(flag_step_anomalies(with_steps({{100, 50}, {200, 50}, {300, 50}})).empty());
}

TEST(Anomalies, NoEventsNothingFlagged) {
    TuningConfig c = simple_career({10}, {10, 20});
    EXPECT_TRUE(flag_step_anomalies(c).empty());
}

TEST(Anomalies, RatioIsConfigurable) {
    // Step 2 pays 20 over 100 threshold units, step 1 pays 50 over 100: ratio 0.4.
    const TuningConfig c = with_steps({{100, 50}, {200, 20}});
    EXPECT_TRUE(flag_step_anomalies(c, 0.25).empty());
    EXPECT_EQ(flag_step_anomalies(c, 0.5).size(), 1u);
}
