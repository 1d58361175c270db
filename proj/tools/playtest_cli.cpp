// playtest: validate tuning files, run experiment suites, diff builds and
// train the softmax baseline.
//
// Exit status: 0 success, 1 domain failure, 2 usage or I/O error.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "playtest/experiments.hpp"
#include "playtest/report.hpp"
#include "playtest/softmax.hpp"
#include "playtest/tuning_analysis.hpp"
#include "playtest/tuning_io.hpp"

namespace fs = std::filesystem;
using namespace playtest;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

fs::path default_out_dir() {
    if (const char* env = std::getenv("PLAYTEST_OUT"); env && *env) return env;
    return "out";
}

// Either inline JSON or a path to a JSON file.
json json_argument(const std::string& value) {
    if (!value.empty() && value.front() == '{') return detail::parse_json_text(value);
    return detail::parse_json_text(read_text_file(value));
}

int cmd_validate(const std::vector<std::string>& paths, const std::string& format, double ratio) {
    bool errors = false;
    bool io_failure = false;
    ordered_json report = ordered_json::array();
    for (const auto& path : paths) {
        std::vector<Diagnostic> diags;
        try {
            const TuningConfig config = parse_tuning_unchecked(read_text_file(path));
            diags = validate(config);
            if (!has_errors(diags)) {
                const auto anomalies = flag_step_anomalies(config, ratio);
                diags.insert(diags.end(), anomalies.begin(), anomalies.end());
            }
        } catch (const IoError& e) {
            std::cerr << path << ": " << e.what() << '\n';
            io_failure = true;
            continue;
        } catch (const SyntaxError& e) {
            std::cerr << path << ": " << e.what() << '\n';
            io_failure = true;
            continue;
        } catch (const SchemaError& e) {
            diags.push_back({Severity::error, "", "schema", e.what(), ""});
        }
        errors = errors || has_errors(diags);
        if (format == "json") {
            for (const auto& d : diags) {
                ordered_json j = to_json(d);
                j["file"] = path;
                report.push_back(j);
            }
        } else {
            for (const auto& d : diags) std::cout << path << ": " << format_diagnostic(d) << '\n';
            if (diags.empty()) std::cout << path << ": ok\n";
        }
    }
    if (format == "json") std::cout << report.dump(2) << '\n';
    if (io_failure) return kUsage;
    return errors ? kDomainFailure : kOk;
}

int cmd_diff(const std::string& a_path, const std::string& b_path, const std::string& format) {
    TuningConfig a, b;
    try {
        a = load_tuning(a_path);
        b = load_tuning(b_path);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    }
    const BuildDiff d = diff_builds(a, b);
    if (format == "json") {
        std::cout << to_json(d).dump(2) << '\n';
    } else if (d.empty()) {
        std::cout << "no differences\n";
    } else {
        for (const auto& c : d.entries) std::cout << format_change(c) << '\n';
    }
    return kOk;
}

int cmd_run(const fs::path& suite, const fs::path& out_dir, std::optional<std::uint64_t> seed, int parallel,
            const std::string& format) {
    std::vector<ExperimentOutcome> outcomes;
    try {
        outcomes = run_suite(suite, SuiteOptions{out_dir, seed, parallel});
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    }
    bool failed = false;
    if (format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& o : outcomes) {
            j.push_back({{"experiment", o.id}, {"kind", o.kind}, {"status", o.ok ? "ok" : "failed"},
                         {"summary", o.ok ? o.headline : o.error}, {"dir", o.dir.string()}});
        }
        std::cout << j.dump(2) << '\n';
    } else if (format == "csv") {
        std::cout << "experiment,kind,status,summary\n";
        for (const auto& o : outcomes) {
            std::cout << csv_field(o.id) << ',' << o.kind << ',' << (o.ok ? "ok" : "failed") << ','
                      << csv_field(o.ok ? o.headline : o.error) << '\n';
        }
    } else {
        std::cout << std::left << std::setw(24) << "experiment" << std::setw(22) << "kind" << std::setw(8) << "status"
                  << "summary\n";
        for (const auto& o : outcomes) {
            std::cout << std::left << std::setw(24) << o.id << std::setw(22) << o.kind << std::setw(8)
                      << (o.ok ? "ok" : "failed") << (o.ok ? o.headline : o.error) << '\n';
        }
    }
    for (const auto& o : outcomes) failed = failed || !o.ok;
    return failed ? kDomainFailure : kOk;
}

struct TrainArgs {
    std::string tuning;
    std::string goal;
    std::string scenario;
    std::string career;
    std::int64_t level = 0;
    std::int64_t episodes = 2000;
    double step_size = 0.5;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_train(const TrainArgs& a) {
    RulesPtr rules;
    GoalSpec goal;
    ScenarioOverrides scenario;
    try {
        rules = make_rules(load_tuning(a.tuning));
        if (!a.goal.empty()) {
            goal = read_goal(json_argument(a.goal));
        } else if (!a.career.empty() && a.level > 0) {
            goal = career_goal(a.career, a.level);
        } else {
            std::cerr << "train: give --goal, or --career with --level\n";
            return kUsage;
        }
        if (!a.scenario.empty()) scenario = read_scenario(json_argument(a.scenario));
        if (!scenario.career && goal.kind == GoalKind::career_level_reached) scenario.career = goal.target;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    }
    const fs::path out = a.out.empty() ? default_out_dir() / "policy.json" : fs::path(a.out);
    TrainingResult res;
    try {
        res = train_softmax(*rules, scenario, goal, a.episodes, a.step_size, a.temperature, a.seed);
    } catch (const Error& e) {
        std::cerr << "train: " << e.what() << '\n';
        return kDomainFailure;
    }
    try {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        detail::write_file(out, to_json(res.policy).dump(2) + "\n");
        std::ostringstream csv;
        csv << "episode,return\n";
        for (std::size_t i = 0; i < res.returns.size(); ++i) csv << i << ',' << ordered_json(res.returns[i]).dump() << '\n';
        fs::path curve = out;
        curve.replace_filename(out.stem().string() + "_returns.csv");
        detail::write_file(curve, csv.str());
        std::cout << "policy: " << out.string() << "\nreturns: " << curve.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    }
    std::cout << "episodes without reaching the goal: " << res.failed_episodes << " of " << res.returns.size() << '\n';
    if (res.failure_rate() > 0.5) {
        std::cerr << "train: goal unreachable in most episodes (deadlock or limits)\n";
        return kDomainFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate game tuning builds and run automated playtests"};
    app.require_subcommand(1);

    std::string format = "text";
    double ratio = kDefaultAnomalyRatio;
    std::vector<std::string> paths;
    auto* validate_cmd = app.add_subcommand("validate", "Check tuning files and report diagnostics");
    validate_cmd->add_option("paths", paths, "Tuning files")->required();
    validate_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    validate_cmd->add_option("--anomaly-ratio", ratio, "Step reward anomaly threshold")->check(CLI::PositiveNumber);

    std::string suite;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int parallel = 1;
    std::string run_format = "text";
    auto* run_cmd = app.add_subcommand("run", "Run an experiment suite");
    run_cmd->add_option("suite", suite, "Suite file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (default $PLAYTEST_OUT or ./out)");
    run_cmd->add_option("--seed", seed, "Override base_seed of every experiment");
    run_cmd->add_option("--parallel", parallel, "Worker threads per experiment")->check(CLI::PositiveNumber);
    run_cmd->add_option("--format", run_format, "Summary format")->check(CLI::IsMember({"text", "json", "csv"}));

    std::string a_path, b_path;
    std::string diff_format = "text";
    auto* diff_cmd = app.add_subcommand("diff", "Structural diff of two builds");
    diff_cmd->add_option("a", a_path, "First build")->required();
    diff_cmd->add_option("b", b_path, "Second build")->required();
    diff_cmd->add_option("--format", diff_format, "Output format")->check(CLI::IsMember({"text", "json"}));

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train the softmax baseline policy");
    train_cmd->add_option("tuning", ta.tuning, "Tuning file")->required();
    train_cmd->add_option("--goal", ta.goal, "Goal JSON (inline or file)");
    train_cmd->add_option("--career", ta.career, "Career goal shortcut");
    train_cmd->add_option("--level", ta.level, "Target level for --career");
    train_cmd->add_option("--scenario", ta.scenario, "Scenario JSON (inline or file)");
    train_cmd->add_option("--episodes", ta.episodes, "Training episodes")->check(CLI::PositiveNumber);
    train_cmd->add_option("--step-size", ta.step_size, "Gradient step size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--temperature", ta.temperature, "Softmax temperature")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", ta.seed, "Random seed");
    train_cmd->add_option("--out", ta.out, "Policy file (default $PLAYTEST_OUT/policy.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*validate_cmd) return cmd_validate(paths, format, ratio);
    if (*diff_cmd) return cmd_diff(a_path, b_path, diff_format);
    if (*run_cmd) return cmd_run(suite, out_dir.empty() ? default_out_dir() : fs::path(out_dir), seed, parallel, run_format);
    if (*train_cmd) return cmd_train(ta);
    return kUsage;
}
