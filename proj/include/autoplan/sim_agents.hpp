// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "autoplan/env.hpp"
#include "autoplan/llm_backend.hpp"

// Programmatic stand-ins for the model. Each answers every prompt the loop
// issues by recognizing the prompt's shape and reading the game state from
// the task id in the description.
namespace autoplan::sim {

enum class PromptKind { thought, action, summary, flaw, revision, update, formalize, unknown };

PromptKind classify_prompt(std::string_view prompt);

// Id from the "Task: <id>" line every description starts with.
std::optional<std::string> task_id(std::string_view prompt);

// Plan text of a history prompt, or the current plan of an update prompt.
std::string plan_text(std::string_view prompt);

// Steps already rendered in a history prompt.
std::size_t steps_taken(std::string_view prompt);

enum class Policy {
    oracle,   // the known-correct sequence, whatever the plan says
    staged,   // toaster-first on heat tasks unless the plan mentions the microwave
    toaster,  // toaster-first on heat tasks, never explores, never learns
    thinker,  // emits only thoughts
};

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view name);

// Under a plan without "microwave", a staged agent that failed with the
// toaster explores the microwave for one of this many alternatives.
inline constexpr std::size_t kStagedAlternatives = 4;

// Plan the updater writes for a task family. Heat has the toaster variant
// the staged updater falls back to.
std::string correct_plan(std::string_view task_family);
std::string toaster_plan();

class AgentBackend final : public Backend {
public:
    AgentBackend(Policy policy, const EnvironmentSuite& suite, CostRates rates = {});

    std::string id() const override { return "sim:" + std::string(to_string(policy_)); }
    Policy policy() const { return policy_; }

protected:
    std::string generate(const CompletionRequest& request) override;

private:
    std::string next_action(std::string_view prompt, const SamplingConfig& sampling) const;
    std::string update(std::string_view prompt) const;

    Policy policy_;
    const EnvironmentSuite& suite_;
};

}  // namespace autoplan::sim
