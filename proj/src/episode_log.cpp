// SPDX-License-Identifier: Apache-2.0
#include "autoplan/episode_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace autoplan {

using nlohmann::json;

void to_json(json& j, const TaskInstance& instance) {
    j = json{{"id", instance.id},
             {"task_family", instance.task_family},
             {"description", instance.description},
             {"env_seed", instance.env_seed},
             {"split", to_string(instance.split)}};
}

void from_json(const json& j, TaskInstance& instance) {
    instance.id = j.at("id").get<std::string>();
    instance.task_family = j.at("task_family").get<std::string>();
    instance.description = j.at("description").get<std::string>();
    instance.env_seed = j.at("env_seed").get<std::uint64_t>();
    instance.split = parse_split(j.at("split").get<std::string>());
}

void to_json(json& j, const Plan& plan) {
    j = json{{"iteration", plan.iteration()}, {"task_family", plan.task_family()}, {"text", plan.text()}};
}

void from_json(const json& j, Plan& plan) {
    plan = Plan::make(j.at("text").get<std::string>(), j.at("iteration").get<unsigned>(),
                      j.at("task_family").get<std::string>());
}

void to_json(json& j, const Step& step) {
    j = json{{"thought", step.thought ? json(*step.thought) : json(nullptr)},
             {"raw_action", step.raw_action},
             {"action", step.action},
             {"observation", step.observation}};
}

void from_json(const json& j, Step& step) {
    const auto& thought = j.at("thought");
    step.thought = thought.is_null() ? std::nullopt : std::optional(thought.get<std::string>());
    step.raw_action = j.at("raw_action").get<std::string>();
    step.action = j.at("action").get<std::string>();
    step.observation = j.at("observation").get<std::string>();
}

void to_json(json& j, const UsageRecord& usage) {
    j = json{{"backend_id", usage.backend_id},
             {"calls", usage.calls},
             {"input_chars", usage.input_chars},
             {"output_chars", usage.output_chars},
             {"estimated_cost", usage.estimated_cost}};
}

void from_json(const json& j, UsageRecord& usage) {
    usage.backend_id = j.at("backend_id").get<std::string>();
    usage.calls = j.at("calls").get<std::uint64_t>();
    usage.input_chars = j.at("input_chars").get<std::uint64_t>();
    usage.output_chars = j.at("output_chars").get<std::uint64_t>();
    usage.estimated_cost = j.at("estimated_cost").get<double>();
}

void to_json(json& j, const Episode& episode) {
    j = json{{"record", "episode"},
             {"instance", episode.instance},
             {"plan", episode.plan},
             {"initial_observation", episode.initial_observation},
             {"steps", episode.steps},
             {"reward", episode.reward},
             {"terminated_by", to_string(episode.terminated_by)},
             {"usage", episode.usage}};
}

void from_json(const json& j, Episode& episode) {
    if (j.value("record", "") != "episode") {
        throw std::invalid_argument("record is not an episode");
    }
    episode.instance = j.at("instance").get<TaskInstance>();
    from_json(j.at("plan"), episode.plan);
    episode.initial_observation = j.at("initial_observation").get<std::string>();
    episode.steps = j.at("steps").get<std::vector<Step>>();
    episode.reward = j.at("reward").get<int>();
    episode.terminated_by = parse_terminated_by(j.at("terminated_by").get<std::string>());
    episode.usage = j.at("usage").get<UsageRecord>();
}

void to_json(json& j, const Reflection& reflection) {
    j = json{{"record", "reflection"},
             {"summary", reflection.summary},
             {"flaws", reflection.flaws},
             {"revision", reflection.revision}};
}

void from_json(const json& j, Reflection& reflection) {
    reflection.summary = j.at("summary").get<std::string>();
    reflection.flaws = j.at("flaws").get<std::string>();
    reflection.revision = j.at("revision").get<std::string>();
}

std::string episode_to_line(const Episode& episode) { return json(episode).dump(); }

Episode episode_from_line(std::string_view line) { return json::parse(line).get<Episode>(); }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::string text;
    for (const auto& line : lines) {
        text += line;
        text += '\n';
    }
    write_text_file(path, text);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

void write_episode_log(const std::filesystem::path& path, const std::vector<Episode>& episodes) {
    std::vector<std::string> lines;
    lines.reserve(episodes.size());
    for (const auto& episode : episodes) lines.push_back(episode_to_line(episode));
    write_lines(path, lines);
}

std::vector<Episode> read_episode_log(const std::filesystem::path& path) {
    std::vector<Episode> episodes;
    for (const auto& line : read_lines(path)) episodes.push_back(episode_from_line(line));
    return episodes;
}

}  // namespace autoplan
