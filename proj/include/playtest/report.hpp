#pragma once

// Suite runner and report files. stats.json, trials.csv and chartdata.json
// are pure functions of the inputs and seed; everything wall-clock related
// goes to manifest.json.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "playtest/error.hpp"
#include "playtest/experiments.hpp"
#include "playtest/rules.hpp"
#include "playtest/stats.hpp"
#include "playtest/tuning_analysis.hpp"
#include "playtest/tuning_io.hpp"

namespace playtest {

inline constexpr std::string_view kTrialsCsvHeader =
    "experiment,group,agent,build,trial,seed,goal_reached,stop_reason,total_actions,event_actions,sessions,"
    "mean_wait,final_clock,relationship_category,career_level,decisions,max_expansions,final_digest";

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

/// Digest over the contents of every input, in order. Each file contributes
/// its length and bytes so that moving bytes between files changes it.
inline std::string inputs_digest(const std::vector<std::string>& contents) {
    std::string buf;
    for (const auto& c : contents) {
        buf += std::to_string(c.size());
        buf += ':';
        buf += c;
    }
    return sha256_hex(buf);
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline ordered_json to_json(const AggregateStats& s) {
    ordered_json j;
    j["group"] = s.group_key;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["min"] = s.min;
    j["max"] = s.max;
    return j;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw IoError("cannot write '" + p.string() + "'");
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ReportBuilder {
    std::string experiment;
    std::ostringstream csv;
    std::int64_t max_expansions = 0;
    double max_decision_seconds = 0.0;
    std::int64_t episodes = 0;

    explicit ReportBuilder(std::string id) : experiment(std::move(id)) { csv << kTrialsCsvHeader << '\n'; }

    void add(const TrialBatch& b) { add(b.group, b.agent, b.build, b.trials); }

    void add(const std::string& group, const std::string& agent, const std::string& build, const std::vector<TrialRecord>& trials) {
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& t = trials[i];
            const auto& c = t.counters;
            long double wait = 0;
            for (auto w : c.wait_intervals) wait += w;
            const double mean_wait = c.wait_intervals.empty() ? 0.0 : static_cast<double>(wait / c.wait_intervals.size());
            ordered_json mw = mean_wait;
            csv << csv_field(experiment) << ',' << csv_field(group) << ',' << csv_field(agent) << ',' << csv_field(build) << ','
                << i << ',' << t.seed << ',' << (t.goal_reached ? "true" : "false") << ',' << csv_field(t.stop_reason) << ','
                << c.total_actions << ',' << c.event_actions << ',' << c.sessions << ',' << mw.dump() << ',' << t.final_clock
                << ',' << csv_field(t.relationship_category.value_or("")) << ',' << t.career_level << ',' << t.decisions << ','
                << t.max_expansions << ',' << t.final_digest << '\n';
            max_expansions = std::max(max_expansions, t.max_expansions);
            max_decision_seconds = std::max(max_decision_seconds, t.max_decision_seconds);
            ++episodes;
        }
    }
};

inline ordered_json batch_json(const TrialBatch& b) {
    ordered_json j;
    j["group"] = b.group;
    j["agent"] = b.agent;
    j["build"] = b.build;
    j["trials"] = b.trials.size();
    j["goals_reached"] = b.goals_reached;
    j["total_actions"] = to_json(b.total_actions);
    j["event_actions"] = to_json(b.event_actions);
    j["sessions"] = to_json(b.sessions);
    j["mean_wait_minutes"] = b.mean_wait;
    j["session_gaps"] = b.wait_gaps;
    return j;
}

inline ordered_json bar_chart(std::string name, std::string legend, const std::vector<AggregateStats>& groups) {
    ordered_json c;
    c["name"] = std::move(name);
    c["type"] = "bar";
    c["legend"] = std::move(legend);
    c["groups"] = ordered_json::array();
    c["means"] = ordered_json::array();
    c["variances"] = ordered_json::array();
    for (const auto& g : groups) {
        c["groups"].push_back(g.group_key);
        c["means"].push_back(g.mean);
        c["variances"].push_back(g.variance);
    }
    return c;
}

}  // namespace detail

struct SuiteOptions {
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    int parallel = 1;
};

struct ExperimentOutcome {
    std::string id;
    std::string kind;
    bool ok = false;
    std::string error;
    std::string headline;
    std::filesystem::path dir;
    std::int64_t max_expansions = 0;
    double max_decision_seconds = 0.0;
};

namespace detail {

struct ExperimentOutput {
    ordered_json results;
    ordered_json charts = ordered_json::array();
    std::string headline;
};

inline ExperimentOutput run_experiment(const ExperimentConfig& xc, const std::vector<RulesPtr>& rules, ReportBuilder& rb,
                                       const ExperimentOptions& opt, const std::filesystem::path& base_dir) {
    ExperimentOutput out;
    const Rules& r = *rules.front();
    std::ostringstream headline;
    headline << std::fixed << std::setprecision(1);
    switch (xc.kind) {
        case ExperimentKind::relationship_balance: {
            const auto res = relationship_balance(r, xc, opt, base_dir);
            rb.add("all", std::string(agent_name(xc.agent)), r.config().build_id, res.trials);
            out.results["category_counts"] = res.category_counts;
            std::vector<AggregateStats> actions, attempts;
            out.results["event_actions"] = ordered_json::array();
            for (const auto& [k, s] : res.event_actions) {
                ordered_json j = to_json(s);
                j["category"] = k.first;
                j["event_index"] = k.second;
                out.results["event_actions"].push_back(j);
                actions.push_back(s);
            }
            out.results["event_attempts"] = ordered_json::array();
            for (const auto& [k, s] : res.attempts) {
                ordered_json j = to_json(s);
                j["category"] = k.first;
                j["event_index"] = k.second;
                out.results["event_attempts"].push_back(j);
                attempts.push_back(s);
            }
            out.charts.push_back(bar_chart("event_actions", "actions performed inside each completed event, by category#index", actions));
            out.charts.push_back(bar_chart("event_attempts", "events attended until completion, by category#index", attempts));
            for (const auto& [c, n] : res.category_counts) headline << c << '=' << n << ' ';
            break;
        }
        case ExperimentKind::career_progression: {
            const auto rows = career_progression(r, xc.careers, xc, opt, base_dir);
            out.results["careers"] = ordered_json::array();
            std::vector<AggregateStats> totals, events;
            for (const auto& b : rows) {
                rb.add(b);
                out.results["careers"].push_back(batch_json(b));
                totals.push_back(b.total_actions);
                events.push_back(b.event_actions);
                headline << b.group << '=' << b.total_actions.mean << ' ';
            }
            out.charts.push_back(bar_chart("total_actions", "total actions to reach the target level", totals));
            out.charts.push_back(bar_chart("event_actions", "event actions to reach the target level", events));
            break;
        }
        case ExperimentKind::object_impact: {
            const auto rows = object_impact(r, xc.careers, xc, opt, base_dir);
            out.results["careers"] = ordered_json::array();
            std::vector<AggregateStats> base, with;
            for (const auto& row : rows) {
                rb.add(row.baseline);
                ordered_json j;
                j["career"] = row.career;
                j["baseline"] = batch_json(row.baseline);
                j["with_objects"] = row.with_objects ? batch_json(*row.with_objects) : ordered_json(nullptr);
                j["price_total"] = row.price_total;
                j["actions_reduction_pct"] = row.reduction_pct;
                j["rho_per_action_saved"] = row.rho_per_action_saved ? ordered_json(*row.rho_per_action_saved) : ordered_json("n/a");
                out.results["careers"].push_back(j);
                base.push_back(row.baseline.total_actions);
                if (row.with_objects) {
                    rb.add(*row.with_objects);
                    with.push_back(row.with_objects->total_actions);
                }
                headline << row.career << '=' << row.reduction_pct << "% ";
            }
            out.charts.push_back(bar_chart("baseline_total_actions", "total actions without objects", base));
            out.charts.push_back(bar_chart("objects_total_actions", "total actions with objects granted at unlock", with));
            break;
        }
        case ExperimentKind::build_comparison: {
            const auto rows = build_comparison(r, *rules.at(1), xc.careers, xc, opt, base_dir);
            out.results["rows"] = ordered_json::array();
            std::vector<AggregateStats> totals;
            for (const auto& row : rows) {
                rb.add(row.batch);
                ordered_json j;
                j["career"] = row.career;
                j["build"] = row.build;
                j["build_id"] = row.build_id;
                j["event_actions_mean"] = row.batch.event_actions.mean;
                j["total_actions_mean"] = row.batch.total_actions.mean;
                j["sessions_mean"] = row.batch.sessions.mean;
                j["mean_wait_minutes"] = row.batch.mean_wait;
                j["detail"] = batch_json(row.batch);
                out.results["rows"].push_back(j);
                AggregateStats s = row.batch.total_actions;
                s.group_key = row.career + "@" + row.build_id;
                totals.push_back(s);
                headline << s.group_key << '=' << s.mean << ' ';
            }
            out.charts.push_back(bar_chart("total_actions", "total actions per career and build", totals));
            break;
        }
        case ExperimentKind::agent_comparison: {
            const auto rows = agent_comparison(r, xc.careers, xc, opt, base_dir);
            out.results["careers"] = ordered_json::array();
            std::vector<AggregateStats> bars;
            ordered_json series;
            series["name"] = "convergence";
            series["type"] = "series";
            series["legend"] = "running mean of total actions against trial count";
            series["series"] = ordered_json::array();
            for (const auto& row : rows) {
                rb.add(row.astar);
                ordered_json j;
                j["career"] = row.career;
                j["astar"] = batch_json(row.astar);
                j["policy"] = to_json(row.policy);
                j["softmax"] = ordered_json::array();
                AggregateStats a = row.astar.total_actions;
                a.group_key = row.career + "/astar";
                bars.push_back(a);
                series["series"].push_back({{"label", a.group_key}, {"values", convergence_series(row.astar.trials)}});
                headline << a.group_key << '=' << a.mean << " (var " << a.variance << ") ";
                for (const auto& [temp, b] : row.softmax) {
                    std::ostringstream ts;
                    ts << temp;
                    const std::string tag = "softmax@" + ts.str();
                    rb.add(b.group, tag, b.build, b.trials);
                    ordered_json sj = batch_json(b);
                    sj["temperature"] = temp;
                    j["softmax"].push_back(sj);
                    AggregateStats s = b.total_actions;
                    s.group_key = row.career + "/" + tag;
                    bars.push_back(s);
                    series["series"].push_back({{"label", s.group_key}, {"values", convergence_series(b.trials)}});
                    headline << s.group_key << '=' << s.mean << " (var " << s.variance << ") ";
                }
                out.results["careers"].push_back(j);
            }
            out.charts.push_back(bar_chart("total_actions", "total actions per agent", bars));
            out.charts.push_back(series);
            break;
        }
    }
    out.headline = headline.str();
    if (!out.headline.empty() && out.headline.back() == ' ') out.headline.pop_back();
    return out;
}

}  // namespace detail

inline std::vector<ExperimentConfig> load_suite(const std::filesystem::path& path) {
    return read_suite(detail::parse_json_text(read_text_file(path)));
}

/// Runs every experiment of a suite, writing one directory per experiment.
/// A failing experiment is recorded and does not stop the others.
inline std::vector<ExperimentOutcome> run_suite(const std::filesystem::path& suite_path, const SuiteOptions& opt) {
    const std::string suite_text = read_text_file(suite_path);
    auto suite = read_suite(detail::parse_json_text(suite_text));
    const auto base_dir = suite_path.parent_path();
    {
        std::set<std::string> ids;
        for (const auto& x : suite) {
            if (!ids.insert(x.id).second) throw SchemaError("suite: duplicate experiment id '" + x.id + "'");
        }
    }
    std::vector<ExperimentOutcome> outcomes;
    for (auto& xc : suite) {
        if (opt.seed) xc.base_seed = *opt.seed;
        ExperimentOutcome oc;
        oc.id = xc.id;
        oc.kind = std::string(to_string(xc.kind));
        oc.dir = opt.out_dir / xc.id;
        std::filesystem::create_directories(oc.dir);

        const auto started = std::chrono::steady_clock::now();
        std::vector<std::string> inputs{suite_text};
        std::vector<std::string> input_names{suite_path.filename().string()};
        detail::ReportBuilder rb(xc.id);
        ordered_json stats;
        stats["experiment"] = xc.id;
        stats["kind"] = oc.kind;
        stats["trials"] = xc.trials;
        stats["base_seed"] = xc.base_seed;
        ordered_json charts;
        charts["experiment"] = xc.id;
        charts["charts"] = ordered_json::array();
        try {
            std::vector<RulesPtr> rules;
            for (const auto& ref : xc.tuning_refs) {
                const std::string text = read_text_file(base_dir / ref);
                inputs.push_back(text);
                input_names.push_back(ref);
                rules.push_back(make_rules(parse_tuning(text)));
            }
            if (xc.agent.policy_path) {
                inputs.push_back(read_text_file(base_dir / *xc.agent.policy_path));
                input_names.push_back(*xc.agent.policy_path);
            }
            ordered_json builds = ordered_json::array();
            for (const auto& r : rules) builds.push_back(r->config().build_id);
            auto res = detail::run_experiment(xc, rules, rb, ExperimentOptions{opt.parallel}, base_dir);
            stats["status"] = "ok";
            stats["builds"] = builds;
            stats["max_expansions"] = rb.max_expansions;
            stats["results"] = std::move(res.results);
            charts["charts"] = std::move(res.charts);
            oc.ok = true;
            oc.headline = res.headline;
        } catch (const Error& e) {
            stats["status"] = "failed";
            stats["error"] = e.what();
            oc.error = e.what();
        }
        oc.max_expansions = rb.max_expansions;
        oc.max_decision_seconds = rb.max_decision_seconds;

        detail::write_file(oc.dir / "stats.json", stats.dump(2) + "\n");
        detail::write_file(oc.dir / "trials.csv", rb.csv.str());
        detail::write_file(oc.dir / "chartdata.json", charts.dump(2) + "\n");

        ordered_json manifest;
        manifest["experiment"] = xc.id;
        manifest["generated_at"] = detail::utc_timestamp();
        manifest["inputs_digest"] = inputs_digest(inputs);
        manifest["inputs"] = ordered_json::array();
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            manifest["inputs"].push_back({{"name", input_names[i]}, {"sha256", sha256_hex(inputs[i])}});
        }
        manifest["tables"] = {"trials.csv"};
        manifest["charts"] = {"chartdata.json"};
        manifest["data"] = {"stats.json"};
        manifest["timing"] = {
            {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()},
            {"max_decision_seconds", rb.max_decision_seconds},
            {"episodes", rb.episodes},
            {"parallel", opt.parallel},
        };
        detail::write_file(oc.dir / "manifest.json", manifest.dump(2) + "\n");
        outcomes.push_back(std::move(oc));
    }
    return outcomes;
}

}  // namespace playtest
