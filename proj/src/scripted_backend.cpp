// SPDX-License-Identifier: Apache-2.0
#include "autoplan/scripted_backend.hpp"

#include <fstream>
#include <regex>

namespace autoplan {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Responder fixed(std::vector<std::string> responses) {
    if (responses.empty()) throw std::invalid_argument("a scripted rule needs at least one response");
    return [responses = std::move(responses)](std::string_view) { return responses; };
}

}  // namespace

std::size_t choose_alternative(const SamplingConfig& sampling, std::size_t rule_index, std::size_t count) {
    if (count <= 1 || sampling.mode == SamplingMode::greedy) return 0;
    return static_cast<std::size_t>(splitmix64(sampling.seed ^ splitmix64(rule_index + 1)) % count);
}

ScriptRule contains_rule(std::string needle, std::vector<std::string> responses) {
    std::string name = "contains:" + needle;
    return {std::move(name),
            [needle = std::move(needle)](std::string_view prompt) {
                return prompt.find(needle) != std::string_view::npos;
            },
            fixed(std::move(responses))};
}

ScriptRule ends_with_rule(std::string suffix, std::vector<std::string> responses) {
    std::string name = "ends_with:" + suffix;
    return {std::move(name),
            [suffix = std::move(suffix)](std::string_view prompt) { return prompt.ends_with(suffix); },
            fixed(std::move(responses))};
}

ScriptRule regex_rule(const std::string& pattern, std::vector<std::string> responses) {
    return {"regex:" + pattern,
            [re = std::regex(pattern)](std::string_view prompt) {
                return std::regex_search(prompt.begin(), prompt.end(), re);
            },
            fixed(std::move(responses))};
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> default_response,
                                 CostRates rates, std::string id)
    : Backend(rates), rules_(std::move(rules)), default_response_(std::move(default_response)),
      id_(std::move(id)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& spec, CostRates rates) {
    std::vector<ScriptRule> rules;
    for (const auto& entry : spec.at("rules")) {
        std::vector<std::string> responses;
        if (entry.contains("responses")) {
            responses = entry.at("responses").get<std::vector<std::string>>();
        } else {
            responses.push_back(entry.at("response").get<std::string>());
        }
        if (entry.contains("contains")) {
            rules.push_back(contains_rule(entry.at("contains").get<std::string>(), std::move(responses)));
        } else if (entry.contains("regex")) {
            rules.push_back(regex_rule(entry.at("regex").get<std::string>(), std::move(responses)));
        } else if (entry.contains("ends_with")) {
            rules.push_back(ends_with_rule(entry.at("ends_with").get<std::string>(), std::move(responses)));
        } else {
            throw std::invalid_argument("scripted rule needs one of contains/regex/ends_with");
        }
    }
    std::optional<std::string> fallback;
    if (spec.contains("default")) fallback = spec.at("default").get<std::string>();
    return std::make_unique<ScriptedBackend>(std::move(rules), std::move(fallback), rates);
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path,
                                                            CostRates rates) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scripted rules " + path.string());
    return from_json(nlohmann::json::parse(in), rates);
}

std::string ScriptedBackend::generate(const CompletionRequest& request) {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (!rules_[i].matches(request.prompt)) continue;
        auto alternatives = rules_[i].respond(request.prompt);
        if (alternatives.empty()) continue;
        return alternatives[choose_alternative(request.sampling, i, alternatives.size())];
    }
    if (default_response_) return *default_response_;
    throw EmptyCompletionError("no scripted rule matches the prompt");
}

}  // namespace autoplan
