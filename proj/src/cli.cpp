// SPDX-License-Identifier: Apache-2.0
#include "autoplan/cli.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "autoplan/config.hpp"
#include "autoplan/episode_log.hpp"
#include "autoplan/household.hpp"
#include "autoplan/optimizer.hpp"
#include "autoplan/replay.hpp"
#include "autoplan/run_store.hpp"

namespace autoplan::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string backend;
    std::string env;
    std::string task_type;
    std::optional<std::size_t> workers;
};

struct TrainOptions {
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> batch_size;
    std::string reflection;
    std::string run_dir;
};

struct EvalOptions {
    std::vector<std::string> plans;
    std::string split = "test";
    std::string format = "plain";
    std::string report;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config_path, "INI config file (defaults apply without one)");
    cmd.add_option("--seed", o.seed, "Run seed");
    cmd.add_option("--backend", o.backend, "remote | scripted:<agent|rules.json> | replay:<dir>");
    cmd.add_option("--env", o.env, "household | qa")->check(CLI::IsMember({"household", "qa"}));
    cmd.add_option("--task-type", o.task_type, "Household task type (pick, light, clean, heat, cool, pick_two)");
    cmd.add_option("--workers", o.workers, "Concurrent episodes")->check(CLI::PositiveNumber);
}

AppConfig base_config(const CommonOptions& o) {
    AppConfig config = o.config_path.empty() ? parse_config(default_config_text()) : load_config(o.config_path);
    auto& run = config.run;
    if (!o.env.empty()) {
        run.env = parse_env_kind(o.env);
        if (run.env == EnvKind::qa && o.task_type.empty()) run.task_family = "qa";
    }
    if (!o.task_type.empty()) run.task_family = o.task_type;
    if (run.env == EnvKind::qa) run.task_family = "qa";
    if (o.seed) run.seed = *o.seed;
    if (!o.backend.empty()) run.backend = o.backend;
    if (o.workers) run.workers = *o.workers;
    return config;
}

std::string format_money(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6) << value;
    return out.str();
}

std::string format_rate(double rate) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << rate * 100.0 << "%";
    return out.str();
}

json row_json(const EvalRow& row) {
    return {{"task_type", row.task_family},
            {"successes", row.successes},
            {"total", row.total},
            {"success_rate", row.rate()},
            {"cost", row.cost},
            {"cost_per_episode", row.total == 0 ? 0.0 : row.cost / static_cast<double>(row.total)}};
}

json report_json(const EvalReport& report, const AppConfig& config, const std::string& split) {
    json rows = json::array();
    for (const auto& row : report.rows) rows.push_back(row_json(row));
    return {{"env", to_string(config.run.env)},
            {"split", split},
            {"backend", backend_kind(config.run.backend)},
            {"rows", rows},
            {"overall", row_json(report.overall)},
            {"usage", report.usage}};
}

void print_table(std::ostream& out, const EvalReport& report) {
    auto line = [&out](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                       const std::string& e, const std::string& f) {
        out << std::left << std::setw(10) << a << std::right << std::setw(10) << b << std::setw(8) << c
            << std::setw(9) << d << std::setw(14) << e << std::setw(18) << f << "\n";
    };
    line("task", "successes", "total", "rate", "cost ($)", "cost/episode ($)");
    auto emit = [&](const EvalRow& row) {
        const double per = row.total == 0 ? 0.0 : row.cost / static_cast<double>(row.total);
        line(row.task_family, std::to_string(row.successes), std::to_string(row.total), format_rate(row.rate()),
             format_money(row.cost), format_money(per));
    };
    for (const auto& row : report.rows) emit(row);
    emit(report.overall);
}

bool directory_has_entries(const std::filesystem::path& dir) {
    return std::filesystem::is_directory(dir) && !std::filesystem::is_empty(dir);
}

int cmd_train(const CommonOptions& common, const TrainOptions& o, std::ostream& out) {
    AppConfig config = base_config(common);
    auto& run = config.run;
    if (o.iterations) run.iterations = *o.iterations;
    if (o.batch_size) run.batch_size = *o.batch_size;
    if (!o.reflection.empty()) {
        try {
            run.reflection = parse_reflection_mode(o.reflection);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("optimizer.reflection", e.what());
        }
    }
    if (run.batch_size == 0) throw ConfigError("optimizer.batch_size", "must be positive");
    if (run.iterations == 0) throw ConfigError("optimizer.iterations", "must be positive");
    if (run.env == EnvKind::household) {
        try {
            household::parse_task_type(run.task_family);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("run.task_type", e.what());
        }
    }
    if (!o.run_dir.empty()) config.run_dir = o.run_dir;
    if (config.run_dir.empty()) {
        config.run_dir = "runs/" + std::string(to_string(run.env)) + "-" + run.task_family + "-seed" + std::to_string(run.seed);
    }
    if (directory_has_entries(config.run_dir)) {
        throw ConfigError("run.run_dir", config.run_dir + " already exists and is not empty");
    }

    auto suite = make_suite(config);
    if (suite->instances(Split::train, run.task_family).empty()) {
        throw ConfigError("run.task_type", "no training instances for " + run.task_family);
    }
    auto inner = make_backend(run.backend, config, *suite);

    const RunStore store(config.run_dir);
    std::filesystem::create_directories(store.dir());
    store.write_environment(config, *suite);
    ReplayCache cache(store.cache_dir());
    RecordingBackend backend(*inner, cache);
    store.write_plan(0, Plan::empty(run.task_family));

    auto result = optimize(run, *suite, backend, [&](const IterationRecord& record) {
        store.write_iteration(record);
        std::size_t successes = 0;
        for (const auto& item : record.batch) successes += item.reward == 1 ? 1 : 0;
        out << "iteration " << record.index + 1 << "/" << run.iterations << ": plan v" << record.plan_out.iteration()
            << ", batch successes " << successes << "/" << record.batch.size() << ", cost $"
            << format_money(record.usage.estimated_cost);
        if (record.failed) out << " [failed: " << record.failure << "]";
        out << "\n";
    });
    store.write_manifest(make_manifest(config, result, backend.id()));
    out << "run directory: " << store.dir().string() << "\n";
    return kOk;
}

int cmd_eval(const CommonOptions& common, const EvalOptions& o, std::ostream& out) {
    AppConfig config = base_config(common);
    Split split;
    try {
        split = parse_split(o.split);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("split", e.what());
    }
    std::map<std::string, Plan> plans;
    for (const auto& path : o.plans) {
        try {
            auto plan = read_plan_file(path);
            plans.insert_or_assign(plan.task_family(), plan);
        } catch (const std::exception& e) {
            throw ConfigError("plan", path + ": " + e.what());
        }
    }
    auto suite = make_suite(config);
    std::string family = config.run.task_family;
    if (family == "all") family.clear();
    if (common.task_type.empty() && config.run.env == EnvKind::household && !plans.empty() && plans.size() == 1) {
        family = plans.begin()->first;
    }
    const auto instances = suite->instances(split, family);
    if (instances.empty()) throw ConfigError("split", "no " + o.split + " instances for '" + family + "'");

    auto backend = make_backend(config.run.backend, config, *suite);
    const auto report = evaluate(plans, instances, *suite, *backend, config.run);
    const auto machine = report_json(report, config, o.split);
    if (o.format == "machine") {
        out << machine.dump(2) << "\n";
    } else {
        print_table(out, report);
        out << "calls " << report.usage.calls << ", input chars " << report.usage.input_chars << ", output chars "
            << report.usage.output_chars << ", total cost $" << format_money(report.usage.estimated_cost) << "\n";
    }
    if (!o.report.empty()) write_text_file(o.report, machine.dump(2) + "\n");
    return kOk;
}

int cmd_replay(const std::string& run_dir, std::ostream& out) {
    if (!std::filesystem::exists(std::filesystem::path(run_dir) / "manifest.json")) {
        throw ConfigError("run_dir", run_dir + " holds no manifest.json");
    }
    const auto report = verify_replay(run_dir);
    if (report.identical) {
        out << "identical\n";
        return kOk;
    }
    out << "diverged at " << report.divergence << "\n";
    return kDivergence;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Iterative natural-language plan optimization for text-environment agents", "autoplan"};
    app.require_subcommand(1);

    CommonOptions train_common;
    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Optimize a plan and write a run directory");
    add_common(*train_cmd, train_common);
    train_cmd->add_option("--iterations", train.iterations, "Optimization iterations I");
    train_cmd->add_option("--batch-size", train.batch_size, "Episodes per iteration B");
    train_cmd->add_option("--reflection", train.reflection, "full | summary-only");
    train_cmd->add_option("--run-dir", train.run_dir, "Output directory (must be empty or absent)");

    CommonOptions eval_common;
    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate plans greedily on a split");
    add_common(*eval_cmd, eval_common);
    eval_cmd->add_option("--plan", eval.plans, "Plan file; repeat for several task types");
    eval_cmd->add_option("--split", eval.split, "train | test");
    eval_cmd->add_option("--format", eval.format, "plain | machine")->check(CLI::IsMember({"plain", "machine"}));
    eval_cmd->add_option("--report", eval.report, "Write the machine-readable report here");

    std::string replay_dir;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded run against its cache");
    replay_cmd->add_option("--run-dir", replay_dir, "Run directory")->required();

    auto* config_cmd = app.add_subcommand("config", "Config file helpers");
    config_cmd->require_subcommand(1);
    std::string config_output;
    auto* config_init = config_cmd->add_subcommand("init", "Print a config file with every default");
    config_init->add_option("--output", config_output, "Write to this file instead of stdout");

    auto* catalog_cmd = app.add_subcommand("catalog", "Household instance catalog");
    catalog_cmd->require_subcommand(1);
    CommonOptions catalog_common;
    std::string catalog_output;
    auto* catalog_export = catalog_cmd->add_subcommand("export", "Write the train/test instance catalog");
    catalog_export->add_option("--config", catalog_common.config_path, "INI config file");
    catalog_export->add_option("--output", catalog_output, "Catalog file (JSON lines)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*train_cmd) return cmd_train(train_common, train, out);
        if (*eval_cmd) return cmd_eval(eval_common, eval, out);
        if (*replay_cmd) return cmd_replay(replay_dir, out);
        if (*config_init) {
            if (config_output.empty()) {
                out << default_config_text();
            } else {
                write_text_file(config_output, default_config_text());
            }
            return kOk;
        }
        if (*catalog_export) {
            AppConfig config = base_config(catalog_common);
            config.run.env = EnvKind::household;
            auto suite = make_suite(config);
            dynamic_cast<const household::HouseholdSuite&>(*suite).export_catalog(catalog_output);
            out << "wrote " << suite->instances(Split::train).size() << " train and "
                << suite->instances(Split::test).size() << " test instances to " << catalog_output << "\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        return kBackend;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}

}  // namespace autoplan::cli
