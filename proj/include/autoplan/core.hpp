// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autoplan {

enum class Split { train, test };
enum class EnvKind { household, qa };
enum class SamplingMode { nucleus, greedy };
enum class ReflectionMode { full, summary_only };

// `finish` covers episodes the environment closes on the agent's request
// (a QA answer) without the objective necessarily being met.
enum class TerminatedBy { goal, finish, step_limit, error };

std::string_view to_string(Split split);
std::string_view to_string(EnvKind kind);
std::string_view to_string(SamplingMode mode);
std::string_view to_string(ReflectionMode mode);
std::string_view to_string(TerminatedBy reason);

// The parse_* helpers throw std::invalid_argument on unknown spellings.
Split parse_split(std::string_view text);
EnvKind parse_env_kind(std::string_view text);
SamplingMode parse_sampling_mode(std::string_view text);
ReflectionMode parse_reflection_mode(std::string_view text);
TerminatedBy parse_terminated_by(std::string_view text);

// Body of the iteration-0 plan. Every prompt carries a plan block, so the
// empty plan is spelled out rather than omitted.
inline constexpr std::string_view kEmptyPlanText = "(no plan yet; act from first principles)";

// Canonical action emitted by the formalizer when a raw action cannot be
// mapped onto the environment grammar.
inline constexpr std::string_view kInvalidAction = "<invalid action>";

// Canonical prefix of augmented-space thought actions. They never reach the
// environment.
inline constexpr std::string_view kThinkPrefix = "think: ";

inline constexpr std::string_view kElisionMarker = "[earlier steps elided]";

// Character budgets standing in for token budgets: a token is approximated
// by `chars_per_token` characters.
struct PromptBudget {
    std::size_t max_prompt_tokens = 8000;
    std::size_t max_plan_tokens = 1000;
    std::size_t chars_per_token = 4;

    std::size_t prompt_chars() const { return max_prompt_tokens * chars_per_token; }
    std::size_t plan_chars() const { return max_plan_tokens * chars_per_token; }
};

// The natural-language plan being optimized. Iteration 0 is always the empty
// plan and nothing else is.
class Plan {
public:
    static Plan empty(std::string task_family);

    // Throws std::invalid_argument when `iteration` and `text` disagree about
    // emptiness or the text is blank. Text longer than `max_chars` is cut at
    // the last line break that fits.
    static Plan make(std::string text, unsigned iteration, std::string task_family,
                     std::size_t max_chars = std::string::npos);

    const std::string& text() const { return text_; }
    unsigned iteration() const { return iteration_; }
    const std::string& task_family() const { return task_family_; }
    bool is_empty() const { return iteration_ == 0; }

    // Successor plan with iteration + 1.
    Plan next(std::string text, std::size_t max_chars = std::string::npos) const;

    bool operator==(const Plan&) const = default;

private:
    Plan(std::string text, unsigned iteration, std::string task_family)
        : text_(std::move(text)), iteration_(iteration), task_family_(std::move(task_family)) {}

    std::string text_;
    unsigned iteration_ = 0;
    std::string task_family_;
};

struct TaskInstance {
    std::string id;
    std::string task_family;
    std::string description;
    std::uint64_t env_seed = 0;
    Split split = Split::train;

    bool operator==(const TaskInstance&) const = default;
};

struct UsageRecord {
    std::string backend_id;
    std::uint64_t calls = 0;
    std::uint64_t input_chars = 0;
    std::uint64_t output_chars = 0;
    double estimated_cost = 0.0;

    UsageRecord& operator+=(const UsageRecord& other);
    bool operator==(const UsageRecord&) const = default;
};

struct Step {
    std::optional<std::string> thought;
    std::string raw_action;
    std::string action;
    std::string observation;

    // A step whose canonical action is itself a thought.
    bool is_thought_only() const;
    bool operator==(const Step&) const = default;
};

struct Episode {
    TaskInstance instance;
    Plan plan = Plan::empty("");
    std::string initial_observation;
    std::vector<Step> steps;
    int reward = 0;
    TerminatedBy terminated_by = TerminatedBy::step_limit;
    UsageRecord usage;

    bool operator==(const Episode&) const = default;
};

struct Reflection {
    std::string summary;
    std::string flaws;
    std::string revision;

    bool operator==(const Reflection&) const = default;
};

struct SamplingConfig {
    SamplingMode mode = SamplingMode::greedy;
    double top_p = 0.9;
    std::uint64_t seed = 0;

    static SamplingConfig greedy() { return {SamplingMode::greedy, 1.0, 0}; }
    static SamplingConfig nucleus(double top_p, std::uint64_t seed) {
        return {SamplingMode::nucleus, top_p, seed};
    }
    bool operator==(const SamplingConfig&) const = default;
};

struct RunConfig {
    EnvKind env = EnvKind::household;
    std::string task_family = "heat";
    std::size_t batch_size = 4;
    std::size_t max_steps = 0;  // 0 selects the environment default
    std::size_t iterations = 3;
    SamplingConfig train_sampling = SamplingConfig::nucleus(0.9, 0);
    SamplingConfig eval_sampling = SamplingConfig::greedy();
    ReflectionMode reflection = ReflectionMode::full;
    std::string backend = "scripted:oracle";
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    PromptBudget budget;

    std::size_t effective_max_steps() const;
};

// 35 interaction steps for the household game, 10 for QA.
std::size_t default_max_steps(EnvKind env);

// H = P ⊕ X ⊕ (o_0, ã_0, a_0, o_1, ...) rendered as newline-joined labeled
// blocks. When the rendering exceeds the budget the oldest steps are dropped
// and replaced by kElisionMarker; the description, plan and o_0 always stay.
std::string assemble_history_prompt(const TaskInstance& instance, const Plan& plan,
                                    std::string_view initial_observation,
                                    std::span<const Step> steps,
                                    const PromptBudget& budget = {});

std::string assemble_history_prompt(const Episode& episode, const PromptBudget& budget = {});

std::string render_plan_block(const Plan& plan);

// Whitespace runs collapsed to one space, ends trimmed.
std::string normalize_whitespace(std::string_view text);

std::string trim(std::string_view text);

}  // namespace autoplan
