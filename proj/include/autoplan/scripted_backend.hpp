// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoplan/llm_backend.hpp"

namespace autoplan {

using PromptMatcher = std::function<bool(std::string_view prompt)>;

// Candidate responses for a matched prompt. More than one candidate declares
// alternatives; nucleus-mode requests pick among them by seed, greedy ones
// always take the first.
using Responder = std::function<std::vector<std::string>(std::string_view prompt)>;

struct ScriptRule {
    std::string name;
    PromptMatcher matches;
    Responder respond;
};

ScriptRule contains_rule(std::string needle, std::vector<std::string> responses);
ScriptRule regex_rule(const std::string& pattern, std::vector<std::string> responses);
ScriptRule ends_with_rule(std::string suffix, std::vector<std::string> responses);

// Deterministic rule table: the first rule whose matcher accepts the prompt
// answers it. Read-only after construction.
class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> default_response = {},
                    CostRates rates = {}, std::string id = "scripted");

    // {"rules": [{"contains"|"regex"|"ends_with": "...", "responses": [...]}],
    //  "default": "..."}
    static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& spec, CostRates rates = {});
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path,
                                                      CostRates rates = {});

    std::string id() const override { return id_; }
    std::size_t rule_count() const { return rules_.size(); }

protected:
    std::string generate(const CompletionRequest& request) override;

private:
    std::vector<ScriptRule> rules_;
    std::optional<std::string> default_response_;
    std::string id_;
};

// Index among `count` alternatives for a request; stable for a given seed so
// every call within one episode makes the same choice for the same rule.
std::size_t choose_alternative(const SamplingConfig& sampling, std::size_t rule_index, std::size_t count);

}  // namespace autoplan
