#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "playtest/experiments.hpp"
#include "support.hpp"

using namespace playtest;
using namespace playtest::testing;

namespace {

ExperimentConfig suite_entry(const std::string& id) {
    for (auto& x : read_suite(detail::parse_json_text(read_text_file(fixture_path("paper_suite.json"))))) {
        if (x.id == id) return x;
    }
    throw std::runtime_error("no suite entry " + id);
}

void expect_sane(const AggregateStats& s) {
    EXPECT_GE(s.count, 1);
    EXPECT_GE(s.variance, 0.0);
    EXPECT_LE(s.min, s.mean);
    EXPECT_LE(s.mean, s.max);
}

void expect_same_trials(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].seed, b[i].seed);
        EXPECT_EQ(a[i].counters, b[i].counters);
        EXPECT_EQ(a[i].final_digest, b[i].final_digest);
        EXPECT_EQ(a[i].goal_reached, b[i].goal_reached);
    }
}

}  // namespace

// --- relationship balance ---------------------------------------------------

TEST(RelationshipBalance, RomanceOutlier) {
    const auto r = fixture_rules("romance_outlier.json");
    const ExperimentConfig xc = suite_entry("relationship_balance");
    const RelationshipBalance out = relationship_balance(*r, xc);
    ASSERT_EQ(out.category_counts.size(), 3u);
    const double romance = out.event_actions.at({"romance", 2}).mean;
    for (const char* other : {"friendship", "rivalry"}) {
        EXPECT_GE(romance, 1.8 * out.event_actions.at({other, 2}).mean) << other;
    }
    for (const auto& [_, s] : out.event_actions) expect_sane(s);
}

TEST(RelationshipBalance, SymmetricCategoriesAgree) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("relationship_balance");
    xc.trials = 60;
    const RelationshipBalance out = relationship_balance(*r, xc);
    ASSERT_EQ(out.category_counts.size(), 3u);
    for (int index = 1; index <= 5; ++index) {
        double lo = 1e300, hi = 0;
        for (const char* k : {"friendship", "romance", "rivalry"}) {
            const double m = out.event_actions.at({k, index}).mean;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        EXPECT_LE(hi, lo * 1.1) << "event " << index;
    }
}

TEST(RelationshipBalance, SingleTrialOneCategory) {
    const auto r = fixture_rules("romance_outlier.json");
    ExperimentConfig xc = suite_entry("relationship_balance");
    xc.trials = 1;
    const RelationshipBalance out = relationship_balance(*r, xc);
    EXPECT_EQ(out.category_counts.size(), 1u);
    std::set<std::string> populated;
    for (const auto& [k, _] : out.event_actions) populated.insert(k.first);
    EXPECT_EQ(populated.size(), 1u);
}

TEST(RelationshipBalance, NeedsCategories) {
    const auto r = make_rules(simple_career({10}, {10}));
    EXPECT_THROW(relationship_balance(*r, suite_entry("relationship_balance")), NoRelationshipEvents);
}

// --- career progression -----------------------------------------------------

TEST(CareerProgression, BaristaShortestLadder) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("career_progression");
    xc.trials = 3;
    const auto rows = career_progression(*r, xc.careers, xc);
    ASSERT_EQ(rows.size(), 4u);
    ASSERT_EQ(rows[0].group, "barista");
    for (const auto& row : rows) {
        EXPECT_EQ(row.goals_reached, xc.trials) << row.group;
        expect_sane(row.total_actions);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[0].total_actions.mean, rows[i].total_actions.mean) << rows[i].group;
}

TEST(CareerProgression, StartingLevelTakesNoActions) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("career_progression");
    xc.trials = 2;
    const auto rows = career_progression(*r, {{"culinary", 1}}, xc);
    EXPECT_EQ(rows[0].total_actions.max, 0.0);
}

TEST(CareerProgression, TargetErrors) {
    const auto r = fixture_rules("desk_base.json");
    const ExperimentConfig xc = suite_entry("career_progression");
    EXPECT_THROW(career_progression(*r, {{"barista", 6}}, xc), TargetAboveCap);
    EXPECT_THROW(career_progression(*r, {{"astronaut", 2}}, xc), UnknownCareer);
}

TEST(CareerProgression, TinyCareerMatchesOracle) {
    ExperimentConfig xc;
    xc.heuristic.weights = {{"goal_pending", 1.0}};
    xc.agent.node_budget = 20000;
    xc.trials = 4;
    xc.max_actions = tiny_goal(2).max_actions;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 60 && checked < 5; ++seed) {
        const auto r = make_rules(random_tiny_fixture(seed));
        const OracleResult o = bfs_oracle(*r, initial_state(*r, with_career("job"), 0), compile_goal(*r, tiny_goal(2)));
        if (o.capped || !o.min_actions || *o.min_actions == 0) continue;
        ++checked;
        const auto rows = career_progression(*r, {{"job", 2}}, xc);
        EXPECT_EQ(rows[0].total_actions.mean, static_cast<double>(*o.min_actions)) << "fixture " << seed;
        EXPECT_EQ(rows[0].total_actions.variance, 0.0);
    }
    EXPECT_EQ(checked, 5);
}

TEST(CareerProgression, MonotoneInTargetLevel) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("career_progression");
    xc.trials = 2;
    for (const char* career : {"barista", "fashion"}) {
        double last = -1;
        for (std::int64_t level = 1; level <= 5; ++level) {
            const double m = career_progression(*r, {{career, level}}, xc)[0].total_actions.mean;
            EXPECT_GE(m, last) << career << " level " << level;
            last = m;
        }
    }
}

// --- object impact ----------------------------------------------------------

TEST(ObjectImpact, DeskObjects) {
    const auto r = fixture_rules("desk_objects.json");
    const ExperimentConfig xc = suite_entry("object_impact");
    const auto rows = object_impact(*r, xc.careers, xc);
    ASSERT_EQ(rows.size(), 2u);

    const auto& culinary = rows[0];
    ASSERT_TRUE(culinary.with_objects.has_value());
    EXPECT_GE(culinary.reduction_pct, 5.0);
    EXPECT_LE(culinary.reduction_pct, 30.0);
    // Frozen regression value for this fixture and suite entry.
    EXPECT_NEAR(culinary.reduction_pct, 21.1, 0.05);
    ASSERT_TRUE(culinary.rho_per_action_saved.has_value());
    EXPECT_NEAR(*culinary.rho_per_action_saved,
                static_cast<double>(culinary.price_total) /
                    (culinary.baseline.total_actions.mean - culinary.with_objects->total_actions.mean),
                1e-9);

    // Medical objects unlock above the target level.
    const auto& medical = rows[1];
    EXPECT_FALSE(medical.with_objects.has_value());
    EXPECT_EQ(medical.reduction_pct, 0.0);
    EXPECT_FALSE(medical.rho_per_action_saved.has_value());
}

TEST(ObjectImpact, NoOpObjectsSaveNothing) {
    TuningConfig c = simple_career({10, 10}, {30, 60, 90}, 20, 1);
    c.actions[1].requirements.owned_object = "twin";
    c.objects.push_back({"twin", {"act1"}});
    c.careers[0].object_unlocks.push_back({"twin", 1, 250});
    const auto r = make_rules(c);
    ExperimentConfig xc;
    xc.heuristic.weights = {{"career_xp", 1.0}};
    xc.trials = 5;
    const auto rows = object_impact(*r, {{"job", 3}}, xc);
    ASSERT_TRUE(rows[0].with_objects.has_value());
    EXPECT_EQ(rows[0].reduction_pct, 0.0);
    EXPECT_FALSE(rows[0].rho_per_action_saved.has_value());
}

// --- build comparison -------------------------------------------------------

TEST(BuildComparison, IdenticalBuildsGiveIdenticalRows) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("build_comparison");
    xc.trials = 2;
    const auto rows = build_comparison(*r, *r, {{"barista", 3}, {"culinary", 3}}, xc);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        EXPECT_EQ(rows[i].build, "a");
        EXPECT_EQ(rows[i + 1].build, "b");
        EXPECT_EQ(rows[i].batch.total_actions, rows[i + 1].batch.total_actions);
        EXPECT_EQ(rows[i].batch.event_actions, rows[i + 1].batch.event_actions);
        EXPECT_EQ(rows[i].batch.sessions, rows[i + 1].batch.sessions);
        EXPECT_EQ(rows[i].batch.mean_wait, rows[i + 1].batch.mean_wait);
    }
}

TEST(BuildComparison, BuildBIsGrindier) {
    const auto a = fixture_rules("build_A_fixture.json");
    const auto b = fixture_rules("build_B_fixture.json");
    const ExperimentConfig xc = suite_entry("build_comparison");
    const auto rows = build_comparison(*a, *b, xc.careers, xc);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        const auto& ra = rows[i].batch;
        const auto& rb = rows[i + 1].batch;
        EXPECT_GE(rb.total_actions.mean, 4.0 * ra.total_actions.mean) << rows[i].career;
        EXPECT_GE(rb.sessions.mean, 4.0 * ra.sessions.mean) << rows[i].career;
        ASSERT_GT(rb.mean_wait, 0.0);
        EXPECT_GE(ra.mean_wait / rb.mean_wait, 5.0) << rows[i].career;
    }
}

TEST(BuildComparison, EmptyCareerList) {
    const auto r = fixture_rules("desk_base.json");
    EXPECT_TRUE(build_comparison(*r, *r, {}, suite_entry("build_comparison")).empty());
}

TEST(BuildComparison, CareerMissing) {
    const auto a = fixture_rules("desk_base.json");
    const auto b = fixture_rules("variance_career.json");
    EXPECT_THROW(build_comparison(*a, *b, {{"culinary", 2}}, suite_entry("build_comparison")), CareerMissingInBuild);
}

// --- agent comparison -------------------------------------------------------

TEST(AgentComparison, VarianceContrast) {
    const auto r = fixture_rules("variance_career.json");
    ExperimentConfig xc = suite_entry("agent_comparison");
    xc.trials = 300;
    const auto rows = agent_comparison(*r, xc.careers, xc);
    ASSERT_EQ(rows.size(), 1u);
    const auto& row = rows[0];
    EXPECT_EQ(row.astar.total_actions.variance, 0.0);
    ASSERT_EQ(row.softmax.size(), 2u);
    EXPECT_EQ(row.softmax[0].first, 1.0);
    EXPECT_GT(row.softmax[0].second.total_actions.variance, 0.0);
    EXPECT_LT(row.softmax[1].second.total_actions.variance, row.softmax[0].second.total_actions.variance);
    EXPECT_GE(row.softmax[0].second.total_actions.mean, row.astar.total_actions.mean);
    const auto series = convergence_series(row.softmax[0].second.trials);
    ASSERT_EQ(series.size(), static_cast<std::size_t>(xc.trials));
    EXPECT_NEAR(series.back(), row.softmax[0].second.total_actions.mean, 1e-9);
}

// --- statistics and reproducibility ----------------------------------------

TEST(Stats, PopulationVariance) {
    Accumulator a;
    for (double x : {1.0, 2.0, 3.0, 4.0}) a.add(x);
    const AggregateStats s = a.stats("k");
    EXPECT_EQ(s.count, 4);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.variance, 1.25);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 4.0);
}

TEST(Stats, MergeEqualsUnion) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Accumulator left, right, all;
        const std::size_t n = 1 + rng.uniform_index(50);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = static_cast<double>(rng.uniform_index(1000));
            (rng.uniform_index(2) ? left : right).add(x);
            all.add(x);
        }
        left.merge(right);
        const AggregateStats m = left.stats("k");
        const AggregateStats u = all.stats("k");
        EXPECT_EQ(m.count, u.count);
        EXPECT_EQ(m.min, u.min);
        EXPECT_EQ(m.max, u.max);
        EXPECT_NEAR(m.mean, u.mean, 1e-9);
        EXPECT_NEAR(m.variance, u.variance, 1e-6);
        expect_sane(m);
    }
}

TEST(Stats, ConstantSeriesHasZeroVariance) {
    Accumulator a;
    for (int i = 0; i < 1000; ++i) a.add(0.1);
    const AggregateStats s = a.stats("k");
    EXPECT_EQ(s.variance, 0.0);
    expect_sane(s);
}

// Disjoint seeded batches aggregate to the same statistics as one batch.
TEST(Reproducibility, SplitBatchesAggregateLikeOne) {
    const auto r = fixture_rules("variance_career.json");
    const GoalSpec goal = career_goal("barista", 3);
    const SoftmaxPlanner planner(*r, default_policy(), goal);
    const CompiledGoal cg = planner.goal();
    const auto all = run_batch(*r, with_career("barista"), planner, cg, 40, 17, {});
    Accumulator whole, first, second;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const double x = static_cast<double>(all[i].counters.total_actions);
        whole.add(x);
        (i < 15 ? first : second).add(x);
        // Trial i depends only on its own seed.
        const TrialRecord alone = run_episode(*r, with_career("barista"), trial_seed(17, i), planner, cg);
        EXPECT_EQ(alone.counters, all[i].counters);
    }
    first.merge(second);
    EXPECT_EQ(first.stats("k").count, whole.stats("k").count);
    EXPECT_NEAR(first.stats("k").mean, whole.stats("k").mean, 1e-12);
    EXPECT_NEAR(first.stats("k").variance, whole.stats("k").variance, 1e-9);
}

TEST(Reproducibility, ParallelMatchesSequential) {
    const auto r = fixture_rules("desk_base.json");
    ExperimentConfig xc = suite_entry("career_progression");
    xc.trials = 6;
    const std::vector<CareerTarget> targets = {{"barista", 3}, {"fashion", 3}};
    const auto seq = career_progression(*r, targets, xc, {1});
    const auto par = career_progression(*r, targets, xc, {4});
    const auto again = career_progression(*r, targets, xc, {1});
    ASSERT_EQ(seq.size(), par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        expect_same_trials(seq[i].trials, par[i].trials);
        expect_same_trials(seq[i].trials, again[i].trials);
        EXPECT_EQ(seq[i].total_actions, par[i].total_actions);
        EXPECT_EQ(seq[i].sessions, par[i].sessions);
    }
}

TEST(Reproducibility, RunIndexedRethrowsFirstError) {
    try {
        run_indexed(10, 3, [](std::int64_t i) -> int {
            if (i == 4 || i == 7) throw InvalidArgument("trial " + std::to_string(i));
            return static_cast<int>(i);
        });
        FAIL() << "expected an exception";
    } catch (const InvalidArgument& e) {
        EXPECT_STREQ(e.what(), "trial 4");
    }
    EXPECT_EQ(run_indexed(5, 8, [](std::int64_t i) { return i * i; }), (std::vector<std::int64_t>{0, 1, 4, 9, 16}));
}

// --- suite parsing ------------------------------------------------------------

TEST(Suite, ShippedSuiteParses) {
    const auto suite = read_suite(detail::parse_json_text(read_text_file(fixture_path("paper_suite.json"))));
    ASSERT_EQ(suite.size(), 5u);
    EXPECT_EQ(suite[3].tuning_refs.size(), 2u);
    EXPECT_EQ(suite[4].agent.type, AgentSpec::Type::softmax);
    EXPECT_EQ(suite[4].agent.temperatures, (std::vector<double>{1.0, 0.001}));
}

TEST(Suite, RejectsBadEntries) {
    const json good = json::parse(R"({"id": "x", "kind": "career_progression", "tuning": "a.json",
        "heuristic": {"weights": {"career_xp": 1}}, "careers": [{"career": "c", "level": 2}],
        "trials": 3, "base_seed": 1})");
    EXPECT_NO_THROW(read_experiment(good, "x"));
    auto broken = [&](auto&& edit) {
        json j = good;
        edit(j);
        return j;
    };
    EXPECT_THROW(read_experiment(broken([](json& j) { j["trials"] = 0; }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["kind"] = "astrology"; }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["base_seed"] = -1; }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["tuning"] = json::array({"a", "b"}); }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["extra"] = 1; }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["kind"] = "relationship_balance"; }), "x"), SchemaError);
    EXPECT_THROW(read_experiment(broken([](json& j) { j["agent"] = {{"type", "softmax"}, {"train", {{"episodes", 0}}}}; }), "x"),
                 SchemaError);
    EXPECT_THROW(read_suite(good), SchemaError);
}
