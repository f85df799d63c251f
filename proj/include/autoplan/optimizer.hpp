// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autoplan/env.hpp"
#include "autoplan/llm_backend.hpp"

namespace autoplan {

// Stop markers of the two per-step completions.
inline const std::vector<std::string> kThoughtStops{"\nAction:", "\nObservation:"};
inline const std::vector<std::string> kActionStops{"\n"};

struct CollectOptions {
    std::size_t max_steps = 35;
    PromptBudget budget;
};

// A replay miss while running the loop, with the place it happened.
class ReplayMissAt : public ReplayMissError {
public:
    ReplayMissAt(const ReplayMissError& miss, std::string where)
        : ReplayMissError(miss), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

// Thought, action, formalize, step; until the environment closes the episode
// or `max_steps` steps were taken. A backend failure ends the episode with
// TerminatedBy::error and stores the exception in `failure` when given.
// Replay misses are not backend failures and propagate as ReplayMissAt.
Episode collect_episode(const EnvironmentSuite& suite, Backend& backend, const Plan& plan,
                        const TaskInstance& instance, const SamplingConfig& sampling,
                        const CollectOptions& options, std::exception_ptr* failure = nullptr);

// H ⊕ "Reward: r" ⊕ the given prompt texts, newline-joined.
std::string reflection_prompt(const Episode& episode, std::span<const std::string> prompts,
                              const PromptBudget& budget = {});

struct ReflectionOutcome {
    Reflection reflection;
    UsageRecord usage;
};

// Summary, flaws, revision as three sequential completions. The summary-only
// mode makes one call and leaves flaws and revision empty.
ReflectionOutcome reflect(Backend& backend, const Episode& episode, ReflectionMode mode,
                          const SamplingConfig& sampling, const PromptBudget& budget = {});

struct UpdateEntry {
    TaskInstance instance;
    Reflection reflection;
};

// Current plan, one block per batch entry in order, then the update prompt.
std::string build_update_prompt(const Plan& plan, std::span<const UpdateEntry> batch);

struct UpdateOutcome {
    Plan plan;
    bool failed = false;  // two empty completions; `plan` is the input plan
    UsageRecord usage;
};

UpdateOutcome update_plan(Backend& backend, const Plan& plan, std::span<const UpdateEntry> batch,
                          const SamplingConfig& sampling, const PromptBudget& budget = {});

struct BatchItem {
    TaskInstance instance;
    Episode episode;
    Reflection reflection;
    int reward = 0;
};

struct IterationRecord {
    std::size_t index = 0;
    Plan plan_in = Plan::empty("");
    std::vector<BatchItem> batch;
    Plan plan_out = Plan::empty("");
    bool failed = false;
    std::string failure;           // reason when failed
    std::size_t resampled = 0;     // episodes replaced after a backend failure
    UsageRecord usage;             // every completion of the iteration
};

// Seed of one derived random stream. Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Instances for iteration `iteration`: a seeded permutation of the pool,
// cycled when the request exceeds the pool.
std::vector<TaskInstance> sample_instances(const std::vector<TaskInstance>& pool, std::size_t count,
                                           std::uint64_t run_seed, std::size_t iteration);

// One iteration over a fixed plan: B episodes and reflections (run on up to
// `config.workers` threads), then one update. A failed episode is replaced
// by the next reserve instance, at most twice per batch slot.
IterationRecord run_iteration(const RunConfig& config, const EnvironmentSuite& suite, Backend& backend,
                              const Plan& plan_in, std::size_t iteration);

struct OptimizeResult {
    Plan final_plan = Plan::empty("");
    std::vector<IterationRecord> iterations;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

OptimizeResult optimize(const RunConfig& config, const EnvironmentSuite& suite, Backend& backend,
                        const IterationObserver& observer = {});

struct EvalRow {
    std::string task_family;
    std::size_t successes = 0;
    std::size_t total = 0;
    double cost = 0.0;

    double rate() const { return total == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(total); }
};

struct EvalReport {
    std::vector<EvalRow> rows;  // one per task family, in first-seen order
    EvalRow overall;
    UsageRecord usage;
    std::vector<Episode> episodes;
};

// One greedy episode per instance under the plan of its family; families
// without a plan run with the empty plan. Never reflects or updates.
EvalReport evaluate(const std::map<std::string, Plan>& plans, std::span<const TaskInstance> instances,
                    const EnvironmentSuite& suite, Backend& backend, const RunConfig& config);

EvalReport evaluate(const Plan& plan, std::span<const TaskInstance> instances, const EnvironmentSuite& suite,
                    Backend& backend, const RunConfig& config);

}  // namespace autoplan
