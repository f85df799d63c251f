// SPDX-License-Identifier: Apache-2.0
#include "autoplan/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <utility>

namespace autoplan {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::pair<std::string_view, Enum>, N>& names,
                std::string_view what) {
    for (const auto& [name, value] : names) {
        if (name == text) return value;
    }
    throw std::invalid_argument("unknown " + std::string(what) + ": '" + std::string(text) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& names) {
    for (const auto& [name, candidate] : names) {
        if (candidate == value) return name;
    }
    return "?";
}

constexpr std::array kSplitNames{std::pair{std::string_view("train"), Split::train},
                                 std::pair{std::string_view("test"), Split::test}};
constexpr std::array kEnvNames{std::pair{std::string_view("household"), EnvKind::household},
                               std::pair{std::string_view("qa"), EnvKind::qa}};
constexpr std::array kSamplingNames{std::pair{std::string_view("nucleus"), SamplingMode::nucleus},
                                    std::pair{std::string_view("greedy"), SamplingMode::greedy}};
constexpr std::array kReflectionNames{
    std::pair{std::string_view("full"), ReflectionMode::full},
    std::pair{std::string_view("summary-only"), ReflectionMode::summary_only}};
constexpr std::array kTerminationNames{
    std::pair{std::string_view("goal"), TerminatedBy::goal},
    std::pair{std::string_view("finish"), TerminatedBy::finish},
    std::pair{std::string_view("step_limit"), TerminatedBy::step_limit},
    std::pair{std::string_view("error"), TerminatedBy::error}};

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

// Longest prefix of `text` within `max_chars`, preferring a line boundary and
// never splitting a UTF-8 sequence.
std::string clip(std::string text, std::size_t max_chars) {
    if (text.size() <= max_chars) return text;
    std::size_t cut = text.rfind('\n', max_chars);
    if (cut == std::string::npos || cut == 0) {
        cut = max_chars;
        while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    }
    text.resize(cut);
    return text;
}

}  // namespace

std::string_view to_string(Split split) { return enum_name(split, kSplitNames); }
std::string_view to_string(EnvKind kind) { return enum_name(kind, kEnvNames); }
std::string_view to_string(SamplingMode mode) { return enum_name(mode, kSamplingNames); }
std::string_view to_string(ReflectionMode mode) { return enum_name(mode, kReflectionNames); }
std::string_view to_string(TerminatedBy reason) { return enum_name(reason, kTerminationNames); }

Split parse_split(std::string_view text) { return parse_enum(text, kSplitNames, "split"); }
EnvKind parse_env_kind(std::string_view text) { return parse_enum(text, kEnvNames, "environment"); }
SamplingMode parse_sampling_mode(std::string_view text) {
    return parse_enum(text, kSamplingNames, "sampling mode");
}
ReflectionMode parse_reflection_mode(std::string_view text) {
    return parse_enum(text, kReflectionNames, "reflection mode");
}
TerminatedBy parse_terminated_by(std::string_view text) {
    return parse_enum(text, kTerminationNames, "termination reason");
}

Plan Plan::empty(std::string task_family) {
    return Plan(std::string(kEmptyPlanText), 0, std::move(task_family));
}

Plan Plan::make(std::string text, unsigned iteration, std::string task_family, std::size_t max_chars) {
    const bool sentinel = text == kEmptyPlanText;
    if (iteration == 0 && !sentinel) {
        throw std::invalid_argument("a plan at iteration 0 must be the empty plan");
    }
    if (iteration != 0 && sentinel) {
        throw std::invalid_argument("the empty-plan text is reserved for iteration 0");
    }
    if (is_blank(text)) throw std::invalid_argument("plan text is blank");
    if (!sentinel) text = clip(std::move(text), max_chars);
    return Plan(std::move(text), iteration, std::move(task_family));
}

Plan Plan::next(std::string text, std::size_t max_chars) const {
    return make(std::move(text), iteration_ + 1, task_family_, max_chars);
}

UsageRecord& UsageRecord::operator+=(const UsageRecord& other) {
    if (backend_id.empty()) backend_id = other.backend_id;
    calls += other.calls;
    input_chars += other.input_chars;
    output_chars += other.output_chars;
    estimated_cost += other.estimated_cost;
    return *this;
}

bool Step::is_thought_only() const { return action.starts_with(kThinkPrefix); }

std::size_t default_max_steps(EnvKind env) { return env == EnvKind::household ? 35 : 10; }

std::size_t RunConfig::effective_max_steps() const {
    return max_steps == 0 ? default_max_steps(env) : max_steps;
}

std::string render_plan_block(const Plan& plan) { return "Plan: " + plan.text(); }

namespace {

std::string render_step(const Step& step) {
    std::string out;
    if (step.thought && !step.thought->empty()) {
        out += "Think: " + *step.thought + "\n";
    }
    if (step.is_thought_only()) {
        out += "Think: " + step.action.substr(kThinkPrefix.size()) + "\n";
    } else if (step.action == kInvalidAction) {
        out += "Action: " + step.raw_action + "\n";
    } else {
        out += "Action: " + step.action + "\n";
    }
    out += "Observation: " + step.observation;
    return out;
}

}  // namespace

std::string assemble_history_prompt(const TaskInstance& instance, const Plan& plan,
                                    std::string_view initial_observation,
                                    std::span<const Step> steps, const PromptBudget& budget) {
    std::string head = instance.description;
    head += '\n';
    head += render_plan_block(plan);
    head += "\nObservation: ";
    head += initial_observation;

    std::vector<std::string> blocks;
    blocks.reserve(steps.size());
    for (const auto& step : steps) blocks.push_back(render_step(step));

    const std::size_t limit = budget.prompt_chars();
    std::size_t total = std::accumulate(blocks.begin(), blocks.end(), head.size(),
                                        [](std::size_t acc, const std::string& b) { return acc + b.size() + 1; });
    std::size_t first = 0;
    if (total > limit) {
        total += kElisionMarker.size() + 1;
        while (first < blocks.size() && total > limit) {
            total -= blocks[first].size() + 1;
            ++first;
        }
    }

    std::string out = std::move(head);
    if (first > 0) {
        out += '\n';
        out += kElisionMarker;
    }
    for (std::size_t i = first; i < blocks.size(); ++i) {
        out += '\n';
        out += blocks[i];
    }
    return out;
}

std::string assemble_history_prompt(const Episode& episode, const PromptBudget& budget) {
    return assemble_history_prompt(episode.instance, episode.plan, episode.initial_observation,
                                   episode.steps, budget);
}

std::string trim(std::string_view text) {
    auto begin = std::find_if_not(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
    auto end = std::find_if_not(text.rbegin(), text.rend(), [](unsigned char c) { return std::isspace(c); }).base();
    return begin < end ? std::string(begin, end) : std::string();
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += static_cast<char>(c);
        }
    }
    return out;
}

}  // namespace autoplan
