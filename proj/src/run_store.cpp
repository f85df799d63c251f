// SPDX-License-Identifier: Apache-2.0
#include "autoplan/run_store.hpp"

#include <regex>

#include "autoplan/episode_log.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/replay.hpp"

namespace autoplan {

using nlohmann::json;

std::string render_plan_file(const Plan& plan) {
    return "# autoplan plan v" + std::to_string(plan.iteration()) + " family=" + plan.task_family() + "\n" +
           plan.text() + "\n";
}

Plan parse_plan_file(std::string_view text) {
    static const std::regex header(R"(# autoplan plan v(\d+) family=(\S*))");
    const auto newline = text.find('\n');
    if (newline == std::string_view::npos) throw std::invalid_argument("plan file has no header line");
    const std::string first(text.substr(0, newline));
    std::smatch m;
    if (!std::regex_match(first, m, header)) throw std::invalid_argument("malformed plan file header: " + first);
    std::string body(text.substr(newline + 1));
    if (!body.empty() && body.back() == '\n') body.pop_back();
    return Plan::make(std::move(body), static_cast<unsigned>(std::stoul(m[1].str())), m[2].str());
}

Plan read_plan_file(const std::filesystem::path& path) { return parse_plan_file(read_text_file(path)); }

std::filesystem::path RunStore::plan_path(std::size_t k) const {
    return dir_ / ("plan_v" + std::to_string(k) + ".txt");
}

std::filesystem::path RunStore::iteration_dir(std::size_t i) const { return dir_ / ("iter_" + std::to_string(i)); }

void RunStore::write_plan(std::size_t k, const Plan& plan) const { write_text_file(plan_path(k), render_plan_file(plan)); }

Plan RunStore::read_plan(std::size_t k) const { return read_plan_file(plan_path(k)); }

void RunStore::write_iteration(const IterationRecord& record) const {
    const auto dir = iteration_dir(record.index);
    std::vector<Episode> episodes;
    std::vector<std::string> reflections;
    json batch{{"iteration", record.index},
               {"plan_in_version", record.plan_in.iteration()},
               {"plan_out_version", record.plan_out.iteration()},
               {"failed", record.failed},
               {"failure", record.failure},
               {"resampled", record.resampled},
               {"usage", record.usage},
               {"instances", json::array()},
               {"rewards", json::array()}};
    for (const auto& item : record.batch) {
        episodes.push_back(item.episode);
        reflections.push_back(json(item.reflection).dump());
        batch["instances"].push_back(item.instance.id);
        batch["rewards"].push_back(item.reward);
    }
    write_episode_log(dir / "episodes.jsonl", episodes);
    write_lines(dir / "reflections.jsonl", reflections);
    write_text_file(dir / "batch.json", batch.dump(2) + "\n");
    write_plan(record.index + 1, record.plan_out);

    std::vector<std::string> usage;
    if (std::filesystem::exists(dir_ / "usage.jsonl")) usage = read_lines(dir_ / "usage.jsonl");
    json line = record.usage;
    line["iteration"] = record.index;
    usage.push_back(line.dump());
    write_lines(dir_ / "usage.jsonl", usage);
}

std::vector<Episode> RunStore::read_episodes(std::size_t i) const {
    return read_episode_log(iteration_dir(i) / "episodes.jsonl");
}

std::vector<Reflection> RunStore::read_reflections(std::size_t i) const {
    std::vector<Reflection> out;
    for (const auto& line : read_lines(iteration_dir(i) / "reflections.jsonl")) {
        out.push_back(json::parse(line).get<Reflection>());
    }
    return out;
}

json RunStore::read_batch(std::size_t i) const { return json::parse(read_text_file(iteration_dir(i) / "batch.json")); }

void RunStore::write_environment(const AppConfig& config, const EnvironmentSuite& suite) const {
    const auto dir = environment_dir();
    if (config.run.env == EnvKind::household) {
        dynamic_cast<const household::HouseholdSuite&>(suite).export_catalog(dir / "catalog.jsonl");
        return;
    }
    const auto& qa_suite = dynamic_cast<const qa::QASuite&>(suite);
    std::vector<std::string> pages;
    for (const auto& page : qa_suite.corpus().pages()) {
        pages.push_back(json{{"title", page.title}, {"sentences", page.sentences}}.dump());
    }
    std::vector<std::string> questions;
    for (const auto& q : qa_suite.questions()) {
        questions.push_back(json{{"id", q.id},
                                 {"question", q.question},
                                 {"answer", q.answer},
                                 {"pages", q.pages},
                                 {"split", to_string(q.split)}}
                                .dump());
    }
    write_lines(dir / "corpus.jsonl", pages);
    write_lines(dir / "questions.jsonl", questions);
}

std::unique_ptr<EnvironmentSuite> RunStore::load_environment(EnvKind env) const {
    const auto dir = environment_dir();
    if (env == EnvKind::household) return household::HouseholdSuite::from_catalog(dir / "catalog.jsonl");
    return std::make_unique<qa::QASuite>(qa::Corpus::from_file(dir / "corpus.jsonl"),
                                         qa::questions_from_jsonl(read_text_file(dir / "questions.jsonl")));
}

void RunStore::write_manifest(const json& manifest) const {
    write_text_file(manifest_path(), manifest.dump(2) + "\n");
}

json RunStore::read_manifest() const { return json::parse(read_text_file(manifest_path())); }

json make_manifest(const AppConfig& config, const OptimizeResult& result, const std::string& backend_id) {
    const auto& run = config.run;
    json manifest{{"format", "autoplan-run/1"},
                  {"env", to_string(run.env)},
                  {"task_family", run.env == EnvKind::qa ? std::string("qa") : run.task_family},
                  {"seed", run.seed},
                  {"batch_size", run.batch_size},
                  {"iterations", run.iterations},
                  {"max_steps", run.effective_max_steps()},
                  {"reflection", to_string(run.reflection)},
                  {"train_sampling", {{"mode", to_string(run.train_sampling.mode)}, {"top_p", run.train_sampling.top_p}}},
                  {"eval_sampling", {{"mode", to_string(run.eval_sampling.mode)}}},
                  {"backend", backend_kind(run.backend)},
                  {"backend_id", backend_id},
                  {"budget",
                   {{"max_prompt_tokens", run.budget.max_prompt_tokens},
                    {"max_plan_tokens", run.budget.max_plan_tokens},
                    {"chars_per_token", run.budget.chars_per_token}}},
                  {"rates", {{"per_input_char", config.rates.per_input_char}, {"per_output_char", config.rates.per_output_char}}}};
    json plans = json::array();
    json iterations = json::array();
    UsageRecord total;
    if (!result.iterations.empty()) {
        const auto& first = result.iterations.front().plan_in;
        plans.push_back({{"k", 0}, {"version", first.iteration()}, {"sha256", sha256_hex(first.text())}});
    }
    for (const auto& record : result.iterations) {
        plans.push_back({{"k", record.index + 1},
                         {"version", record.plan_out.iteration()},
                         {"sha256", sha256_hex(record.plan_out.text())}});
        json rewards = json::array();
        std::size_t successes = 0;
        for (const auto& item : record.batch) {
            rewards.push_back(item.reward);
            successes += item.reward == 1 ? 1 : 0;
        }
        iterations.push_back({{"index", record.index},
                              {"failed", record.failed},
                              {"resampled", record.resampled},
                              {"rewards", rewards},
                              {"successes", successes}});
        total += record.usage;
    }
    manifest["plans"] = plans;
    manifest["iteration_records"] = iterations;
    manifest["usage"] = total;
    return manifest;
}

RunConfig run_config_from_manifest(const json& manifest) {
    RunConfig run;
    run.env = parse_env_kind(manifest.at("env").get<std::string>());
    run.task_family = manifest.at("task_family").get<std::string>();
    run.seed = manifest.at("seed").get<std::uint64_t>();
    run.batch_size = manifest.at("batch_size").get<std::size_t>();
    run.iterations = manifest.at("iterations").get<std::size_t>();
    run.max_steps = manifest.at("max_steps").get<std::size_t>();
    run.reflection = parse_reflection_mode(manifest.at("reflection").get<std::string>());
    const auto& sampling = manifest.at("train_sampling");
    run.train_sampling.mode = parse_sampling_mode(sampling.at("mode").get<std::string>());
    run.train_sampling.top_p = sampling.at("top_p").get<double>();
    run.backend = manifest.at("backend").get<std::string>();
    const auto& budget = manifest.at("budget");
    run.budget.max_prompt_tokens = budget.at("max_prompt_tokens").get<std::size_t>();
    run.budget.max_plan_tokens = budget.at("max_plan_tokens").get<std::size_t>();
    run.budget.chars_per_token = budget.at("chars_per_token").get<std::size_t>();
    return run;
}

namespace {

std::optional<std::string> compare_episode(const Episode& stored, const Episode& replayed) {
    if (stored.instance.id != replayed.instance.id) {
        return "instance " + stored.instance.id + " was replayed as " + replayed.instance.id;
    }
    const auto n = std::min(stored.steps.size(), replayed.steps.size());
    for (std::size_t t = 0; t < n; ++t) {
        if (stored.steps[t] != replayed.steps[t]) return "step " + std::to_string(t);
    }
    if (stored.steps.size() != replayed.steps.size()) return "step " + std::to_string(n) + " (episode length differs)";
    if (stored != replayed) return "episode outcome";
    return std::nullopt;
}

}  // namespace

ReplayReport verify_replay(const std::filesystem::path& run_dir) {
    const RunStore store(run_dir);
    const auto manifest = store.read_manifest();
    const RunConfig config = run_config_from_manifest(manifest);
    const auto suite = store.load_environment(config.env);
    const auto& rates = manifest.at("rates");
    ReplayBackend backend(store.cache_dir(),
                          {rates.at("per_input_char").get<double>(), rates.at("per_output_char").get<double>()},
                          manifest.at("backend_id").get<std::string>());

    auto diverged = [](std::size_t i, const std::string& site) {
        return ReplayReport{false, "iter_" + std::to_string(i) + ": " + site};
    };
    for (std::size_t i = 0; i < config.iterations; ++i) {
        std::optional<Plan> plan_in;
        try {
            plan_in = store.read_plan(i);
        } catch (const std::exception& e) {
            return diverged(i, std::string("plan_v") + std::to_string(i) + ".txt is unreadable: " + e.what());
        }
        IterationRecord record;
        try {
            record = run_iteration(config, *suite, backend, *plan_in, i);
        } catch (const ReplayMissAt& miss) {
            return diverged(i, "replay miss in " + miss.where() + " (request " + miss.request_hash() + ")");
        } catch (const ReplayMissError& miss) {
            return diverged(i, "replay miss (request " + miss.request_hash() + ")");
        }

        const auto episodes = store.read_episodes(i);
        const auto reflections = store.read_reflections(i);
        if (episodes.size() != record.batch.size()) {
            return diverged(i, "batch holds " + std::to_string(record.batch.size()) + " episodes, recorded " +
                                   std::to_string(episodes.size()));
        }
        for (std::size_t j = 0; j < episodes.size(); ++j) {
            const auto& item = record.batch[j];
            if (auto site = compare_episode(episodes[j], item.episode)) {
                return diverged(i, "episode " + std::to_string(j) + " (" + episodes[j].instance.id + "), " + *site);
            }
            if (j >= reflections.size() || reflections[j] != item.reflection) {
                return diverged(i, "reflection of episode " + std::to_string(j) + " (" + item.instance.id + ")");
            }
        }
        Plan recorded_next = Plan::empty("");
        try {
            recorded_next = store.read_plan(i + 1);
        } catch (const std::exception& e) {
            return diverged(i, std::string("plan_v") + std::to_string(i + 1) + ".txt is unreadable: " + e.what());
        }
        if (recorded_next != record.plan_out) {
            return diverged(i, "plan update (plan_v" + std::to_string(i + 1) + ".txt differs)");
        }
    }
    return {};
}

}  // namespace autoplan
