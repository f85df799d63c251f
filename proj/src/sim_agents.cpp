// SPDX-License-Identifier: Apache-2.0
#include "autoplan/sim_agents.hpp"

#include <algorithm>
#include <cctype>

#include "autoplan/household.hpp"
#include "autoplan/prompts.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/scripted_backend.hpp"

namespace autoplan::sim {

namespace {

using household::HouseholdAction;
using household::Verb;

constexpr std::size_t kExploreRule = 17;

bool mentions(std::string_view text, std::string_view word) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    return lowered.find(word) != std::string::npos;
}

bool ends_with_trimmed(std::string_view prompt, std::string_view suffix) {
    return trim(prompt).ends_with(trim(suffix));
}

std::size_t count(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

std::vector<std::string> labeled_lines(std::string_view text, std::string_view label) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (line.starts_with(label)) out.emplace_back(line.substr(label.size()));
        start = end + 1;
    }
    return out;
}

// Reward line of a reflection prompt.
int reward_of(std::string_view prompt) {
    auto lines = labeled_lines(prompt, "Reward: ");
    return !lines.empty() && lines.back() == "1" ? 1 : 0;
}

const Verb kHeat = Verb::heat;

HouseholdAction heat_with(const HouseholdAction& take, const household::Receptacle& appliance) {
    return {kHeat, take.object, household::Ref{appliance.kind, appliance.index}, {}};
}

std::vector<HouseholdAction> toaster_first(const household::GeneratedWorld& world, bool explore) {
    const auto oracle = household::oracle_sequence(world.state, world.objective);
    // oracle: go host, take, go microwave, heat, go target, put
    const auto toaster = world.state.find_receptacle("toaster", 1);
    const auto& toaster_recep = world.state.receptacles.at(*toaster);
    std::vector<HouseholdAction> actions{oracle[0], oracle[1],
                                         {Verb::go, std::nullopt, household::Ref{"toaster", 1}, {}},
                                         heat_with(oracle[1], toaster_recep)};
    if (explore) actions.insert(actions.end(), oracle.begin() + 2, oracle.end());
    return actions;
}

}  // namespace

PromptKind classify_prompt(std::string_view prompt) {
    if (ends_with_trimmed(prompt, prompt_template("thought"))) return PromptKind::thought;
    if (trim(prompt).ends_with("Action:")) return PromptKind::action;
    if (ends_with_trimmed(prompt, prompt_template("revision"))) return PromptKind::revision;
    if (ends_with_trimmed(prompt, prompt_template("flaw"))) return PromptKind::flaw;
    if (ends_with_trimmed(prompt, prompt_template("summary"))) return PromptKind::summary;
    if (ends_with_trimmed(prompt, prompt_template("update"))) return PromptKind::update;
    if (trim(prompt).ends_with("Formatted action:")) return PromptKind::formalize;
    return PromptKind::unknown;
}

std::optional<std::string> task_id(std::string_view prompt) {
    constexpr std::string_view label = "Task: ";
    auto pos = prompt.find(label);
    if (pos == std::string_view::npos) return std::nullopt;
    pos += label.size();
    const auto end = prompt.find('\n', pos);
    return trim(prompt.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
}

std::string plan_text(std::string_view prompt) {
    if (prompt.starts_with("Current plan:\n")) {
        const auto begin = std::string_view("Current plan:\n").size();
        const auto end = prompt.find("\n\nJob ", begin);
        return std::string(prompt.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    }
    const auto begin = prompt.find("\nPlan: ");
    if (begin == std::string_view::npos) return {};
    const auto start = begin + std::string_view("\nPlan: ").size();
    const auto end = prompt.find("\nObservation: ", start);
    return std::string(prompt.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::size_t steps_taken(std::string_view prompt) {
    const auto n = count(prompt, "\nObservation: ");
    return n == 0 ? 0 : n - 1;
}

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::oracle: return "oracle";
        case Policy::staged: return "staged";
        case Policy::toaster: return "toaster";
        case Policy::thinker: return "thinker";
    }
    return "?";
}

std::optional<Policy> parse_policy(std::string_view name) {
    for (auto policy : {Policy::oracle, Policy::staged, Policy::toaster, Policy::thinker}) {
        if (to_string(policy) == name) return policy;
    }
    return std::nullopt;
}

std::string correct_plan(std::string_view family) {
    const std::string fetch = "1. Go to the receptacle that holds the target object and take it.\n";
    const std::string deliver = "Go to the target receptacle and put the object in/on it.";
    if (family == "pick") return fetch + "2. " + deliver;
    if (family == "light") return fetch + "2. Go to the receptacle that holds the desklamp and use the desklamp.";
    if (family == "clean") return fetch + "2. Go to sinkbasin 1 and clean the object with sinkbasin 1.\n3. " + deliver;
    if (family == "heat") return fetch + "2. Go to microwave 1 and heat the object with microwave 1.\n3. " + deliver;
    if (family == "cool") return fetch + "2. Go to fridge 1 and cool the object with fridge 1.\n3. " + deliver;
    if (family == "pick_two") {
        return fetch + "2. " + deliver + "\n3. Find the second target object, take it, and put it in/on the same receptacle.";
    }
    return "1. Search for each entity the question mentions.\n"
           "2. Look up keywords when the first sentences do not answer it.\n"
           "3. Finish with the answer.";
}

std::string toaster_plan() {
    return "1. Go to the receptacle that holds the target object and take it.\n"
           "2. Go to toaster 1 and heat the object with toaster 1.\n"
           "3. Go to the target receptacle and put the object in/on it.";
}

AgentBackend::AgentBackend(Policy policy, const EnvironmentSuite& suite, CostRates rates)
    : Backend(rates), policy_(policy), suite_(suite) {}

std::string AgentBackend::next_action(std::string_view prompt, const SamplingConfig& sampling) const {
    if (policy_ == Policy::thinker) return "think: I should look around before acting.";
    const auto id = task_id(prompt);
    if (!id) throw BackendError("sim agent: prompt carries no task id");
    const auto& instance = suite_.find(*id);
    const std::size_t t = steps_taken(prompt);

    if (suite_.kind() == EnvKind::qa) {
        const auto& question = dynamic_cast<const qa::QASuite&>(suite_).question(*id);
        if (t < question.pages.size()) return "search[" + question.pages[t] + "]";
        return "finish[" + question.answer + "]";
    }

    const auto type = household::parse_task_type(instance.task_family);
    const auto world = household::generate_world(type, instance.env_seed);
    std::vector<HouseholdAction> actions;
    const bool toaster_first_policy =
        type == household::TaskType::heat &&
        (policy_ == Policy::toaster || (policy_ == Policy::staged && !mentions(plan_text(prompt), "microwave")));
    if (toaster_first_policy) {
        const bool explore = policy_ == Policy::staged &&
                             choose_alternative(sampling, kExploreRule, kStagedAlternatives) == kStagedAlternatives - 1;
        actions = toaster_first(world, explore);
    } else {
        actions = household::oracle_sequence(world.state, world.objective);
    }
    if (t < actions.size()) return actions[t].str();
    // Out of script: repeat the last attempt, which keeps failing the same way.
    return actions.back().str();
}

std::string AgentBackend::update(std::string_view prompt) const {
    std::string family;
    if (auto id = task_id(prompt)) family = suite_.find(*id).task_family;
    const auto current = plan_text(prompt);
    switch (policy_) {
        case Policy::oracle: return correct_plan(family);
        case Policy::thinker: return "1. Think about the task before acting.";
        case Policy::toaster: return family == "heat" ? toaster_plan() : correct_plan(family);
        case Policy::staged: break;
    }
    if (family != "heat") return correct_plan(family);
    bool learned = mentions(current, "microwave");
    for (const auto& revision : labeled_lines(prompt, "Revision: ")) learned = learned || mentions(revision, "microwave");
    return learned ? correct_plan("heat") : toaster_plan();
}

std::string AgentBackend::generate(const CompletionRequest& request) {
    const std::string_view prompt = request.prompt;
    switch (classify_prompt(prompt)) {
        case PromptKind::thought: {
            const auto action = next_action(prompt, request.sampling);
            if (action.starts_with(kThinkPrefix)) return "I am not sure what to do yet.";
            return "I am at step " + std::to_string(steps_taken(prompt) + 1) + " of the plan. Next: " + action + ".";
        }
        case PromptKind::action: return next_action(prompt, request.sampling);
        case PromptKind::summary: {
            std::string out = "Steps taken:";
            std::size_t n = 0;
            for (const auto& action : labeled_lines(prompt, "Action: ")) {
                out += " (" + std::to_string(++n) + ") " + action + ";";
            }
            if (n == 0) out += " none;";
            out += reward_of(prompt) == 1 ? " the task succeeded." : " the task failed.";
            return out;
        }
        case PromptKind::flaw: {
            if (mentions(prompt, "toaster cannot be used for heating.")) {
                return "The plan heats the object with the toaster, but toaster cannot be used for heating.";
            }
            if (reward_of(prompt) == 1) return "No flawed step; the plan worked.";
            return "The plan did not reach the goal within the step limit.";
        }
        case PromptKind::revision: {
            const bool toaster_failed = mentions(prompt, "toaster cannot be used for heating.");
            const bool microwave_worked = mentions(prompt, "using the microwave");
            if (toaster_failed && microwave_worked) {
                return "Heat the object with the microwave instead of the toaster: go to microwave 1, then heat the "
                       "object with microwave 1.";
            }
            if (toaster_failed) return "Stop heating with the toaster and try another appliance.";
            if (reward_of(prompt) == 1) return "No revision needed.";
            return "Follow the plan steps in order.";
        }
        case PromptKind::update: return update(prompt);
        case PromptKind::formalize: {
            const auto lines = labeled_lines(prompt, "Raw action: ");
            return lines.empty() ? std::string("nothing") : lines.back();
        }
        case PromptKind::unknown: break;
    }
    throw BackendError("sim agent: unrecognized prompt");
}

}  // namespace autoplan::sim
