// SPDX-License-Identifier: Apache-2.0
#include "autoplan/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "autoplan/formalizer.hpp"
#include "autoplan/prompts.hpp"

namespace autoplan {

namespace {

constexpr std::string_view kThoughtAck = "OK.";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Drops a leading "Label:" the model may echo back.
std::string strip_leading_label(std::string text, std::initializer_list<std::string_view> labels) {
    text = trim(text);
    for (auto label : labels) {
        if (text.size() >= label.size() &&
            std::equal(label.begin(), label.end(), text.begin(),
                       [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) ==
                                                   std::tolower(static_cast<unsigned char>(b)); })) {
            return trim(std::string_view(text).substr(label.size()));
        }
    }
    return text;
}

Completion call(Backend& backend, std::string prompt, const SamplingConfig& sampling,
                std::vector<std::string> stops = {}) {
    CompletionRequest request;
    request.prompt = std::move(prompt);
    request.sampling = sampling;
    request.stop_markers = std::move(stops);
    return backend.complete(request);
}

// Runs fn(0..count-1) on up to `workers` threads. Exceptions escape only via
// fn's own handling.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
    for (auto& thread : threads) thread.join();
}

std::string where(const TaskInstance& instance, std::string_view phase, std::size_t step) {
    return "instance " + instance.id + " " + std::string(phase) + " at step " + std::to_string(step);
}

}  // namespace

Episode collect_episode(const EnvironmentSuite& suite, Backend& backend, const Plan& plan,
                        const TaskInstance& instance, const SamplingConfig& sampling,
                        const CollectOptions& options, std::exception_ptr* failure) {
    auto env = suite.make_environment();
    Episode episode;
    episode.instance = instance;
    episode.plan = plan;
    episode.initial_observation = env->reset(instance);
    episode.usage.backend_id = backend.id();
    const Formalizer formalizer(suite.kind(), &backend);
    const std::string& thought_prompt = prompt_template("thought");

    for (std::size_t t = 0; t < options.max_steps; ++t) {
        const std::string history = assemble_history_prompt(episode, options.budget);
        Step step;
        try {
            auto thought = call(backend, history + "\n" + thought_prompt, sampling, kThoughtStops);
            episode.usage += thought.usage;
            step.thought = strip_leading_label(thought.text, {"think:", "thought:"});

            auto action = call(backend, history + "\nThink: " + *step.thought + "\nAction:", sampling, kActionStops);
            episode.usage += action.usage;
            step.raw_action = strip_leading_label(action.text, {"action:"});

            if (auto as_think = as_thought(step.raw_action)) {
                step.action = std::move(*as_think);
            } else {
                auto formal = formalizer.formalize(step.raw_action);
                if (formal.used_backend) episode.usage += formal.usage;
                step.action = std::move(formal.action);
            }
        } catch (const ReplayMissAt&) {
            throw;
        } catch (const ReplayMissError& miss) {
            throw ReplayMissAt(miss, where(instance, "episode", t));
        } catch (const BackendError&) {
            if (failure) *failure = std::current_exception();
            episode.reward = 0;
            episode.terminated_by = TerminatedBy::error;
            return episode;
        }

        if (step.is_thought_only()) {
            step.observation = std::string(kThoughtAck);
            episode.steps.push_back(std::move(step));
            continue;
        }
        auto transition = env->step(step.action);
        step.observation = std::move(transition.observation);
        episode.steps.push_back(std::move(step));
        if (transition.done) {
            const bool goal = env->goal_reached();
            episode.reward = goal ? 1 : 0;
            episode.terminated_by = goal ? TerminatedBy::goal : TerminatedBy::finish;
            return episode;
        }
    }
    episode.reward = env->goal_reached() ? 1 : 0;
    episode.terminated_by = TerminatedBy::step_limit;
    return episode;
}

std::string reflection_prompt(const Episode& episode, std::span<const std::string> prompts,
                              const PromptBudget& budget) {
    std::string out = assemble_history_prompt(episode, budget);
    out += "\nReward: " + std::to_string(episode.reward);
    for (const auto& prompt : prompts) {
        out += '\n';
        out += prompt;
    }
    return out;
}

ReflectionOutcome reflect(Backend& backend, const Episode& episode, ReflectionMode mode,
                          const SamplingConfig& sampling, const PromptBudget& budget) {
    ReflectionOutcome outcome;
    outcome.usage.backend_id = backend.id();
    auto ask = [&](std::initializer_list<std::string_view> names, std::string_view phase) {
        std::vector<std::string> prompts;
        for (auto name : names) prompts.push_back(prompt_template(name));
        try {
            auto completion = call(backend, reflection_prompt(episode, prompts, budget), sampling);
            outcome.usage += completion.usage;
            return trim(completion.text);
        } catch (const ReplayMissAt&) {
            throw;
        } catch (const ReplayMissError& miss) {
            throw ReplayMissAt(miss, where(episode.instance, phase, episode.steps.size()));
        }
    };
    outcome.reflection.summary = ask({"summary"}, "summary");
    if (mode == ReflectionMode::full) {
        outcome.reflection.flaws = ask({"flaw"}, "flaw");
        outcome.reflection.revision = ask({"flaw", "revision"}, "revision");
    }
    return outcome;
}

std::string build_update_prompt(const Plan& plan, std::span<const UpdateEntry> batch) {
    std::string out = "Current plan:\n" + plan.text() + "\n";
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto& entry = batch[j];
        out += "\nJob " + std::to_string(j + 1) + ":\n";
        out += entry.instance.description + "\n";
        out += "Summary: " + entry.reflection.summary + "\n";
        out += "Flaws: " + entry.reflection.flaws + "\n";
        out += "Revision: " + entry.reflection.revision + "\n";
    }
    out += "\n" + prompt_template("update");
    return out;
}

UpdateOutcome update_plan(Backend& backend, const Plan& plan, std::span<const UpdateEntry> batch,
                          const SamplingConfig& sampling, const PromptBudget& budget) {
    UpdateOutcome outcome{plan, false, {}};
    outcome.usage.backend_id = backend.id();
    const std::string prompt = build_update_prompt(plan, batch);
    for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
        SamplingConfig attempt_sampling = sampling;
        if (sampling.mode == SamplingMode::nucleus) attempt_sampling.seed = sampling.seed + attempt;
        try {
            auto completion = call(backend, prompt, attempt_sampling);
            outcome.usage += completion.usage;
            auto text = strip_leading_label(completion.text, {"new plan:", "plan:"});
            if (text.empty() || text == kEmptyPlanText) continue;
            outcome.plan = plan.next(std::move(text), budget.plan_chars());
            return outcome;
        } catch (const ReplayMissAt&) {
            throw;
        } catch (const ReplayMissError& miss) {
            throw ReplayMissAt(miss, "plan update, attempt " + std::to_string(attempt + 1));
        } catch (const EmptyCompletionError&) {
            continue;
        }
    }
    outcome.failed = true;
    return outcome;
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(splitmix64(splitmix64(splitmix64(run_seed) ^ a) ^ b) ^ c);
}

std::vector<TaskInstance> sample_instances(const std::vector<TaskInstance>& pool, std::size_t count,
                                           std::uint64_t run_seed, std::size_t iteration) {
    if (pool.empty()) throw std::invalid_argument("the training instance pool is empty");
    std::vector<TaskInstance> out;
    out.reserve(count);
    for (std::uint64_t cycle = 0; out.size() < count; ++cycle) {
        std::mt19937_64 rng(derive_seed(run_seed, 0x1157, iteration, cycle));
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
        for (std::size_t i = 0; i < order.size() && out.size() < count; ++i) out.push_back(pool[order[i]]);
    }
    return out;
}

namespace {

std::string train_family(const RunConfig& config) { return config.env == EnvKind::qa ? "qa" : config.task_family; }

void validate(const RunConfig& config) {
    if (config.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (config.iterations == 0) throw std::invalid_argument("iterations must be positive");
    if (config.effective_max_steps() == 0) throw std::invalid_argument("max_steps must be positive");
    if (config.train_sampling.mode == SamplingMode::nucleus &&
        !(config.train_sampling.top_p > 0.0 && config.train_sampling.top_p <= 1.0)) {
        throw std::invalid_argument("top_p must lie in (0, 1]");
    }
}

SamplingConfig with_seed(const SamplingConfig& base, std::uint64_t seed) {
    SamplingConfig sampling = base;
    if (sampling.mode == SamplingMode::nucleus) sampling.seed = seed;
    return sampling;
}

struct SlotResult {
    std::optional<BatchItem> item;
    UsageRecord usage;
    std::size_t resampled = 0;
    std::exception_ptr error;       // last backend failure of the slot
    std::exception_ptr replay_miss;
};

constexpr std::size_t kMaxResamples = 2;

}  // namespace

IterationRecord run_iteration(const RunConfig& config, const EnvironmentSuite& suite, Backend& backend,
                              const Plan& plan_in, std::size_t iteration) {
    validate(config);
    const std::size_t batch = config.batch_size;
    const auto pool = suite.instances(Split::train, train_family(config));
    const auto candidates = sample_instances(pool, batch * (1 + kMaxResamples), config.seed, iteration);
    const CollectOptions options{config.effective_max_steps(), config.budget};

    std::vector<SlotResult> slots(batch);
    parallel_for(batch, config.workers, [&](std::size_t k) {
        auto& slot = slots[k];
        slot.usage.backend_id = backend.id();
        try {
            for (std::size_t attempt = 0; attempt <= kMaxResamples; ++attempt) {
                const auto& instance = attempt == 0 ? candidates[k] : candidates[batch + k * kMaxResamples + attempt - 1];
                const auto sampling = with_seed(config.train_sampling, derive_seed(config.seed, iteration, k, attempt));
                std::exception_ptr failure;
                auto episode = collect_episode(suite, backend, plan_in, instance, sampling, options, &failure);
                slot.usage += episode.usage;
                if (episode.terminated_by == TerminatedBy::error) {
                    slot.error = failure;
                    if (attempt < kMaxResamples) ++slot.resampled;
                    continue;
                }
                const auto reflect_sampling =
                    with_seed(config.train_sampling, derive_seed(config.seed, iteration, k, 0x5EF1 + attempt));
                try {
                    auto reflection = reflect(backend, episode, config.reflection, reflect_sampling, config.budget);
                    slot.usage += reflection.usage;
                    const int reward = episode.reward;
                    slot.item = BatchItem{instance, std::move(episode), std::move(reflection.reflection), reward};
                } catch (const ReplayMissError&) {
                    throw;
                } catch (const BackendError&) {
                    slot.error = std::current_exception();
                }
                return;
            }
        } catch (const ReplayMissError&) {
            slot.replay_miss = std::current_exception();
        }
    });

    IterationRecord record;
    record.index = iteration;
    record.plan_in = plan_in;
    record.plan_out = plan_in;
    record.usage.backend_id = backend.id();
    for (const auto& slot : slots) {
        if (slot.replay_miss) std::rethrow_exception(slot.replay_miss);
    }
    for (std::size_t k = 0; k < batch; ++k) {
        auto& slot = slots[k];
        record.usage += slot.usage;
        record.resampled += slot.resampled;
        if (slot.item) {
            record.batch.push_back(std::move(*slot.item));
            continue;
        }
        if (!record.failed) {
            record.failed = true;
            if (!slot.error) {
                record.failure = "batch slot " + std::to_string(k + 1) + " could not be filled";
                continue;
            }
            try {
                std::rethrow_exception(slot.error);
            } catch (const TransportError&) {
                throw;
            } catch (const std::exception& e) {
                record.failure = "batch slot " + std::to_string(k + 1) + " could not be filled: " + e.what();
            }
        }
    }
    if (record.failed) return record;

    std::vector<UpdateEntry> entries;
    entries.reserve(record.batch.size());
    for (const auto& item : record.batch) entries.push_back({item.instance, item.reflection});
    const auto update_sampling = with_seed(config.train_sampling, derive_seed(config.seed, iteration, 0xD47E));
    try {
        auto update = update_plan(backend, plan_in, entries, update_sampling, config.budget);
        record.usage += update.usage;
        if (update.failed) {
            record.failed = true;
            record.failure = "the plan update returned no usable text twice";
        } else {
            record.plan_out = std::move(update.plan);
        }
    } catch (const ReplayMissError&) {
        throw;
    } catch (const TransportError&) {
        throw;
    } catch (const BackendError& e) {
        record.failed = true;
        record.failure = std::string("the plan update failed: ") + e.what();
    }
    return record;
}

OptimizeResult optimize(const RunConfig& config, const EnvironmentSuite& suite, Backend& backend,
                        const IterationObserver& observer) {
    validate(config);
    OptimizeResult result;
    result.final_plan = Plan::empty(train_family(config));
    for (std::size_t i = 0; i < config.iterations; ++i) {
        auto record = run_iteration(config, suite, backend, result.final_plan, i);
        if (observer) observer(record);
        result.final_plan = record.plan_out;
        result.iterations.push_back(std::move(record));
    }
    return result;
}

EvalReport evaluate(const std::map<std::string, Plan>& plans, std::span<const TaskInstance> instances,
                    const EnvironmentSuite& suite, Backend& backend, const RunConfig& config) {
    const CollectOptions options{config.effective_max_steps(), config.budget};
    std::vector<Episode> episodes(instances.size());
    std::vector<std::exception_ptr> misses(instances.size());
    parallel_for(instances.size(), config.workers, [&](std::size_t i) {
        const auto& instance = instances[i];
        auto it = plans.find(instance.task_family);
        const Plan plan = it != plans.end() ? it->second : Plan::empty(instance.task_family);
        try {
            std::exception_ptr failure;
            episodes[i] = collect_episode(suite, backend, plan, instance, SamplingConfig::greedy(), options, &failure);
            if (failure) std::rethrow_exception(failure);
        } catch (const ReplayMissError&) {
            misses[i] = std::current_exception();
        } catch (const TransportError&) {
            misses[i] = std::current_exception();
        } catch (const BackendError&) {
        }
    });
    for (const auto& miss : misses) {
        if (miss) std::rethrow_exception(miss);
    }

    EvalReport report;
    report.overall.task_family = "overall";
    report.usage.backend_id = backend.id();
    for (const auto& episode : episodes) {
        auto row = std::find_if(report.rows.begin(), report.rows.end(),
                                [&](const EvalRow& r) { return r.task_family == episode.instance.task_family; });
        if (row == report.rows.end()) {
            report.rows.push_back({episode.instance.task_family, 0, 0, 0.0});
            row = std::prev(report.rows.end());
        }
        for (EvalRow* target : {&*row, &report.overall}) {
            target->successes += episode.reward == 1 ? 1 : 0;
            target->total += 1;
            target->cost += episode.usage.estimated_cost;
        }
        report.usage += episode.usage;
    }
    report.episodes = std::move(episodes);
    return report;
}

EvalReport evaluate(const Plan& plan, std::span<const TaskInstance> instances, const EnvironmentSuite& suite,
                    Backend& backend, const RunConfig& config) {
    std::map<std::string, Plan> plans;
    for (const auto& instance : instances) plans.emplace(instance.task_family, plan);
    return evaluate(plans, instances, suite, backend, config);
}

}  // namespace autoplan
