// SPDX-License-Identifier: Apache-2.0
#include "autoplan/config.hpp"

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "autoplan/episode_log.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/replay.hpp"
#include "autoplan/scripted_backend.hpp"
#include "autoplan/sim_agents.hpp"

namespace autoplan {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T read(const pt::ptree& tree, const std::string& field, T fallback) {
    auto node = tree.get_optional<std::string>(field);
    if (!node) return fallback;
    try {
        return tree.get<T>(field);
    } catch (const pt::ptree_error&) {
        throw ConfigError(field, "cannot parse '" + *node + "'");
    }
}

template <typename T>
T required(const pt::ptree& tree, const std::string& field) {
    if (!tree.get_optional<std::string>(field)) throw ConfigError(field, "required field is missing");
    return read<T>(tree, field, T{});
}

std::size_t positive(const std::string& field, std::size_t value) {
    if (value == 0) throw ConfigError(field, "must be positive");
    return value;
}

template <typename Parse>
auto parse_enum(const pt::ptree& tree, const std::string& field, const std::string& fallback, Parse parse) {
    const auto text = read<std::string>(tree, field, fallback);
    try {
        return parse(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
    }
}

}  // namespace

AppConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
    }

    AppConfig config;
    auto& run = config.run;
    run.env = parse_enum(tree, "run.env", "household", parse_env_kind);
    run.task_family = read<std::string>(tree, "run.task_type", run.env == EnvKind::qa ? "qa" : "heat");
    if (run.env == EnvKind::household) {
        try {
            household::parse_task_type(run.task_family);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("run.task_type", e.what());
        }
    }
    run.seed = read<std::uint64_t>(tree, "run.seed", 0);
    run.workers = positive("run.workers", read<std::size_t>(tree, "run.workers", 1));
    config.run_dir = read<std::string>(tree, "run.run_dir", "");

    run.batch_size = positive("optimizer.batch_size", required<std::size_t>(tree, "optimizer.batch_size"));
    run.iterations = positive("optimizer.iterations", required<std::size_t>(tree, "optimizer.iterations"));
    run.max_steps = read<std::size_t>(tree, "optimizer.max_steps", 0);
    run.reflection = parse_enum(tree, "optimizer.reflection", "full", parse_reflection_mode);

    run.train_sampling.mode = parse_enum(tree, "sampling.train_mode", "nucleus", parse_sampling_mode);
    run.train_sampling.top_p = read<double>(tree, "sampling.train_top_p", 0.9);
    if (!(run.train_sampling.top_p > 0.0 && run.train_sampling.top_p <= 1.0)) {
        throw ConfigError("sampling.train_top_p", "must lie in (0, 1]");
    }
    run.eval_sampling.mode = parse_enum(tree, "sampling.eval_mode", "greedy", parse_sampling_mode);
    if (run.eval_sampling.mode != SamplingMode::greedy) {
        throw ConfigError("sampling.eval_mode", "evaluation always decodes greedily");
    }

    run.backend = read<std::string>(tree, "backend.kind", "scripted:oracle");
    config.remote.endpoint = read<std::string>(tree, "backend.endpoint", config.remote.endpoint);
    config.remote.model = read<std::string>(tree, "backend.model", config.remote.model);
    config.remote.api_key_env = read<std::string>(tree, "backend.api_key_env", config.remote.api_key_env);
    config.remote.timeout = std::chrono::seconds(read<long>(tree, "backend.timeout_seconds", 120));
    config.remote.max_attempts = static_cast<int>(
        positive("backend.max_attempts", read<std::size_t>(tree, "backend.max_attempts", 3)));
    config.rates.per_input_char = read<double>(tree, "backend.rate_in", config.rates.per_input_char);
    config.rates.per_output_char = read<double>(tree, "backend.rate_out", config.rates.per_output_char);
    if (config.rates.per_input_char < 0) throw ConfigError("backend.rate_in", "must be nonnegative");
    if (config.rates.per_output_char < 0) throw ConfigError("backend.rate_out", "must be nonnegative");

    run.budget.max_prompt_tokens =
        positive("prompt.max_prompt_tokens", read<std::size_t>(tree, "prompt.max_prompt_tokens", 8000));
    run.budget.max_plan_tokens =
        positive("prompt.max_plan_tokens", read<std::size_t>(tree, "prompt.max_plan_tokens", 1000));
    run.budget.chars_per_token =
        positive("prompt.chars_per_token", read<std::size_t>(tree, "prompt.chars_per_token", 4));

    config.catalog.train_per_type = read<std::size_t>(tree, "household.train_per_type", 24);
    config.catalog.test_per_type = read<std::size_t>(tree, "household.test_per_type", 10);
    config.catalog_path = read<std::string>(tree, "household.catalog", "");
    config.qa_corpus = read<std::string>(tree, "qa.corpus", "");
    config.qa_questions = read<std::string>(tree, "qa.questions", "");
    return config;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError("config", e.what());
    }
    return parse_config(text);
}

std::string default_config_text() {
    return R"([run]
env = household
task_type = heat
seed = 0
workers = 1
run_dir =

[optimizer]
batch_size = 4
iterations = 3
; 0 selects the environment default: 35 for household, 10 for qa
max_steps = 0
; full or summary-only
reflection = full

[sampling]
train_mode = nucleus
train_top_p = 0.9
eval_mode = greedy

[backend]
; remote, scripted:<oracle|staged|toaster|thinker|rules.json>, replay:<dir>
kind = scripted:oracle
endpoint = https://api.openai.com/v1
model = gpt-4-0314
api_key_env = OPENAI_API_KEY
timeout_seconds = 120
max_attempts = 3
; currency per character
rate_in = 0.0000075
rate_out = 0.000015

[prompt]
max_prompt_tokens = 8000
max_plan_tokens = 1000
chars_per_token = 4

[household]
train_per_type = 24
test_per_type = 10
catalog =

[qa]
corpus =
questions =
)";
}

std::unique_ptr<EnvironmentSuite> make_suite(const AppConfig& config) {
    if (config.run.env == EnvKind::qa) {
        auto corpus = config.qa_corpus.empty() ? qa::Corpus::bundled() : qa::Corpus::from_file(config.qa_corpus);
        auto questions = config.qa_questions.empty() ? qa::bundled_questions()
                                                     : qa::questions_from_jsonl(read_text_file(config.qa_questions));
        return std::make_unique<qa::QASuite>(std::move(corpus), std::move(questions));
    }
    if (!config.catalog_path.empty()) return household::HouseholdSuite::from_catalog(config.catalog_path);
    return std::make_unique<household::HouseholdSuite>(config.catalog);
}

std::unique_ptr<Backend> make_backend(const std::string& selector, const AppConfig& config,
                                      const EnvironmentSuite& suite) {
    if (selector == "remote") return std::make_unique<RemoteBackend>(config.remote, config.rates);
    if (selector.starts_with("scripted:")) {
        const auto name = selector.substr(9);
        if (auto policy = sim::parse_policy(name)) return std::make_unique<sim::AgentBackend>(*policy, suite, config.rates);
        if (!std::filesystem::exists(name)) {
            throw ConfigError("backend.kind", "no scripted agent or rules file named '" + name + "'");
        }
        return ScriptedBackend::from_file(name, config.rates);
    }
    if (selector.starts_with("replay:")) {
        std::filesystem::path dir = selector.substr(7);
        if (std::filesystem::exists(dir / "cache")) dir /= "cache";
        if (!std::filesystem::is_directory(dir)) throw ConfigError("backend.kind", "no replay cache at " + dir.string());
        return std::make_unique<ReplayBackend>(dir, config.rates);
    }
    throw ConfigError("backend.kind", "unknown backend '" + selector + "'");
}

std::string backend_kind(const std::string& selector) {
    if (selector.starts_with("replay:")) return "replay";
    if (selector.starts_with("scripted:")) {
        const auto name = selector.substr(9);
        if (sim::parse_policy(name)) return selector;
        return "scripted:" + std::filesystem::path(name).filename().string();
    }
    return selector;
}

}  // namespace autoplan
