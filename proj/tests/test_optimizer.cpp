// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <mutex>
#include <regex>
#include <set>

#include "autoplan/household_env.hpp"
#include "autoplan/optimizer.hpp"
#include "autoplan/prompts.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/replay.hpp"
#include "autoplan/scripted_backend.hpp"
#include "autoplan/sim_agents.hpp"
#include "support.hpp"

using namespace autoplan;

namespace {

const household::HouseholdSuite& household_suite() {
    static const household::HouseholdSuite suite;
    return suite;
}

RunConfig heat_config(std::size_t batch, std::uint64_t seed, ReflectionMode mode = ReflectionMode::full) {
    RunConfig config;
    config.env = EnvKind::household;
    config.task_family = "heat";
    config.batch_size = batch;
    config.iterations = 3;
    config.seed = seed;
    config.reflection = mode;
    config.train_sampling = SamplingConfig::nucleus(0.9, 0);
    return config;
}

// Logs every request before forwarding it.
class Spy final : public Backend {
public:
    explicit Spy(Backend& inner) : inner_(inner) {}
    std::string id() const override { return inner_.id(); }

    std::vector<std::string> prompts() const {
        std::lock_guard lock(mutex_);
        return prompts_;
    }
    void clear() {
        std::lock_guard lock(mutex_);
        prompts_.clear();
    }

protected:
    std::string generate(const CompletionRequest& request) override {
        {
            std::lock_guard lock(mutex_);
            prompts_.push_back(request.prompt);
        }
        return inner_.complete(request).text;
    }

private:
    Backend& inner_;
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

// Fails every request whose prompt contains `needle`.
class Faulty final : public Backend {
public:
    Faulty(Backend& inner, std::string needle) : inner_(inner), needle_(std::move(needle)) {}
    std::string id() const override { return inner_.id(); }

protected:
    std::string generate(const CompletionRequest& request) override {
        if (request.prompt.find(needle_) != std::string::npos) throw BackendError("injected failure");
        return inner_.complete(request).text;
    }

private:
    Backend& inner_;
    std::string needle_;
};

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

Episode finished_episode(const TaskInstance& instance, int reward) {
    Episode episode;
    episode.instance = instance;
    episode.plan = Plan::empty(instance.task_family);
    episode.initial_observation = "o0";
    Step step;
    step.raw_action = step.action = "go to fridge 1";
    step.observation = "The fridge 1 is closed.";
    episode.steps.push_back(step);
    episode.reward = reward;
    return episode;
}

}  // namespace

TEST_SUITE("collect") {
    TEST_CASE("the oracle agent solves every household type through the full loop") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::oracle, suite);
        for (const auto& family : suite.task_families()) {
            for (const auto& instance : suite.instances(Split::train, family)) {
                const auto episode = collect_episode(suite, backend, Plan::empty(family), instance,
                                                     SamplingConfig::nucleus(0.9, 5), {35, {}});
                CHECK_MESSAGE(episode.reward == 1, instance.id);
                CHECK(episode.terminated_by == TerminatedBy::goal);
                if (family == "heat") CHECK(episode.steps.size() <= 7);
            }
        }
    }

    TEST_CASE("the loop issues thought and action prompts in the documented shape") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::oracle, suite);
        Spy spy(agent);
        const auto& instance = suite.find("heat-train-0");
        const auto episode = collect_episode(suite, spy, Plan::empty("heat"), instance, SamplingConfig::greedy(), {});
        const auto prompts = spy.prompts();
        REQUIRE(prompts.size() == 2 * episode.steps.size());
        const auto head = assemble_history_prompt(instance, Plan::empty("heat"), episode.initial_observation, {});
        CHECK(prompts[0] == head + "\n" + prompt_template("thought"));
        CHECK(prompts[1] == head + "\nThink: " + *episode.steps[0].thought + "\nAction:");
        const auto after_one = assemble_history_prompt(instance, Plan::empty("heat"), episode.initial_observation,
                                                       std::span(episode.steps).first(1));
        CHECK(prompts[2] == after_one + "\n" + prompt_template("thought"));
    }

    TEST_CASE("an agent that only thinks runs into the step limit") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::thinker, suite);
        const auto episode = collect_episode(suite, backend, Plan::empty("pick"), suite.find("pick-train-1"),
                                             SamplingConfig::greedy(), {35, {}});
        CHECK(episode.reward == 0);
        CHECK(episode.terminated_by == TerminatedBy::step_limit);
        CHECK(episode.steps.size() == 35);
        for (const auto& step : episode.steps) CHECK(step.observation == "OK.");
    }

    TEST_CASE("greedy episodes are reproducible") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::staged, suite);
        const auto& instance = suite.find("heat-test-100002");
        const auto a = collect_episode(suite, backend, Plan::empty("heat"), instance, SamplingConfig::greedy(), {});
        const auto b = collect_episode(suite, backend, Plan::empty("heat"), instance, SamplingConfig::greedy(), {});
        CHECK(a == b);
    }

    TEST_CASE("a backend failure ends the episode with an error") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::oracle, suite);
        Faulty faulty(agent, "Observation: You pick up");
        std::exception_ptr failure;
        const auto episode = collect_episode(suite, faulty, Plan::empty("heat"), suite.find("heat-train-2"),
                                             SamplingConfig::greedy(), {}, &failure);
        CHECK(episode.terminated_by == TerminatedBy::error);
        CHECK(episode.reward == 0);
        CHECK(failure != nullptr);
    }
}

TEST_SUITE("reflect") {
    TEST_CASE("three completions in full mode, one in summary-only mode") {
        const auto& suite = household_suite();
        ScriptedBackend scripted({ends_with_rule(prompt_template("revision"), {"use the microwave"}),
                                  ends_with_rule(prompt_template("flaw"), {"the toaster step"}),
                                  ends_with_rule(prompt_template("summary"), {"went to the toaster"})});
        Spy spy(scripted);
        const auto episode = finished_episode(suite.find("heat-train-0"), 0);

        const auto full = reflect(spy, episode, ReflectionMode::full, SamplingConfig::greedy());
        CHECK(full.reflection == Reflection{"went to the toaster", "the toaster step", "use the microwave"});
        CHECK(full.usage.calls == 3);
        const auto prompts = spy.prompts();
        REQUIRE(prompts.size() == 3);
        const auto base = assemble_history_prompt(episode) + "\nReward: 0\n";
        CHECK(prompts[0] == base + prompt_template("summary"));
        CHECK(prompts[1] == base + prompt_template("flaw"));
        CHECK(prompts[2] == base + prompt_template("flaw") + "\n" + prompt_template("revision"));

        const auto ablated = reflect(scripted, episode, ReflectionMode::summary_only, SamplingConfig::greedy());
        CHECK(ablated.reflection.summary == "went to the toaster");
        CHECK(ablated.reflection.flaws.empty());
        CHECK(ablated.reflection.revision.empty());
        CHECK(ablated.usage.calls == 1);
    }

    TEST_CASE("the staged agent blames the toaster and proposes the microwave") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::toaster, suite);
        const auto episode = collect_episode(suite, backend, Plan::empty("heat"), suite.find("heat-train-4"),
                                             SamplingConfig::greedy(), {});
        REQUIRE(episode.reward == 0);
        bool saw_toaster_feedback = false;
        for (const auto& step : episode.steps) {
            saw_toaster_feedback = saw_toaster_feedback || step.observation == "toaster cannot be used for heating.";
        }
        CHECK(saw_toaster_feedback);
        const auto outcome = reflect(backend, episode, ReflectionMode::full, SamplingConfig::greedy());
        CHECK(outcome.reflection.flaws.find("toaster") != std::string::npos);

        const auto success = finished_episode(suite.find("heat-train-5"), 1);
        CHECK_FALSE(reflect(backend, success, ReflectionMode::full, SamplingConfig::greedy()).reflection.summary.empty());
    }
}

TEST_SUITE("update") {
    TEST_CASE("the update prompt holds one block per job in order") {
        const auto& suite = household_suite();
        for (std::size_t b : {2u, 4u, 8u}) {
            std::vector<UpdateEntry> batch;
            for (std::size_t j = 0; j < b; ++j) {
                batch.push_back({suite.instances(Split::train, "heat")[j],
                                 {"sum" + std::to_string(j), "flaw" + std::to_string(j), "rev" + std::to_string(j)}});
            }
            const auto plan = Plan::make("1. old plan", 1, "heat");
            const auto prompt = build_update_prompt(plan, batch);
            CHECK(prompt.starts_with("Current plan:\n1. old plan\n"));
            CHECK(count(prompt, "\nSummary: ") == b);
            CHECK(count(prompt, "\nFlaws: ") == b);
            CHECK(count(prompt, "\nRevision: ") == b);
            std::size_t last = 0;
            for (std::size_t j = 0; j < b; ++j) {
                const auto pos = prompt.find(batch[j].instance.description);
                REQUIRE(pos != std::string::npos);
                CHECK(pos > last);
                CHECK(prompt.find("Summary: sum" + std::to_string(j), pos) < prompt.find("Flaws: flaw" + std::to_string(j), pos));
                last = pos;
            }
            CHECK(prompt.ends_with("rewrite the current game plan. Pay attention to summary of successful jobs, and "
                                   "flawed actions and suggested revision of all jobs. The plan should be "
                                   "generalizable to all job objectives. The actions in the plan should also be in "
                                   "the form as in game description."));
        }
    }

    TEST_CASE("summary-only prompts differ from full prompts only in the flaw and revision slots") {
        const auto& suite = household_suite();
        std::vector<UpdateEntry> full, ablated;
        for (std::size_t j = 0; j < 4; ++j) {
            const auto& instance = suite.instances(Split::train, "heat")[j];
            full.push_back({instance, {"s" + std::to_string(j), "f" + std::to_string(j), "r" + std::to_string(j)}});
            ablated.push_back({instance, {"s" + std::to_string(j), "", ""}});
        }
        const auto plan = Plan::empty("heat");
        auto a = build_update_prompt(plan, full);
        const auto b = build_update_prompt(plan, ablated);
        for (std::size_t j = 0; j < 4; ++j) {
            a = std::regex_replace(a, std::regex("Flaws: f" + std::to_string(j) + "\n"), "Flaws: \n");
            a = std::regex_replace(a, std::regex("Revision: r" + std::to_string(j) + "\n"), "Revision: \n");
        }
        CHECK(a == b);
    }

    TEST_CASE("an identity updater keeps the text and bumps the version") {
        ScriptedBackend identity({contains_rule("Current plan:", {"1. keep going"})});
        const auto plan = Plan::make("1. keep going", 2, "pick");
        const auto outcome = update_plan(identity, plan, {}, SamplingConfig::greedy());
        CHECK_FALSE(outcome.failed);
        CHECK(outcome.plan.text() == plan.text());
        CHECK(outcome.plan.iteration() == 3);
    }

    TEST_CASE("an empty update is retried once, then the plan is kept") {
        ScriptedBackend empty({}, "   ");
        Spy spy(empty);
        const auto plan = Plan::make("1. x", 1, "pick");
        const auto outcome = update_plan(spy, plan, {}, SamplingConfig::nucleus(0.9, 3));
        CHECK(outcome.failed);
        CHECK(outcome.plan == plan);
        CHECK(spy.prompts().size() == 2);
    }

    TEST_CASE("a staged updater learns the microwave from a revision") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::staged, suite);
        const std::vector<UpdateEntry> batch{
            {suite.find("heat-train-0"), {"I used the toaster.", "The toaster cannot heat.", "Heat it using the microwave 1."}}};
        const auto learned = update_plan(backend, Plan::empty("heat"), batch, SamplingConfig::greedy());
        CHECK(learned.plan.text().find("microwave") != std::string::npos);

        const std::vector<UpdateEntry> none{{suite.find("heat-train-0"), {"I used the toaster.", "", ""}}};
        const auto stuck = update_plan(backend, Plan::empty("heat"), none, SamplingConfig::greedy());
        CHECK(stuck.plan.text().find("microwave") == std::string::npos);
    }
}

TEST_SUITE("optimize") {
    TEST_CASE("sampling is seeded, without repeats inside a batch, and cycles past the pool") {
        const auto pool = household_suite().instances(Split::train, "heat");
        const auto a = sample_instances(pool, 8, 3, 0);
        CHECK(a == sample_instances(pool, 8, 3, 0));
        CHECK(a != sample_instances(pool, 8, 3, 1));
        std::set<std::string> ids;
        for (const auto& i : a) ids.insert(i.id);
        CHECK(ids.size() == 8);
        const auto many = sample_instances(pool, pool.size() + 5, 3, 0);
        CHECK(many.size() == pool.size() + 5);
        CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
        CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    }

    TEST_CASE("three iterations give three records, version three, and B episodes each") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::staged, suite);
        const auto config = heat_config(4, 0);
        const auto result = optimize(config, suite, backend);
        REQUIRE(result.iterations.size() == 3);
        CHECK(result.final_plan.iteration() == 3);
        std::size_t episodes = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& record = result.iterations[i];
            CHECK(record.index == i);
            CHECK(record.batch.size() == 4);
            CHECK(record.plan_out.iteration() == record.plan_in.iteration() + 1);
            if (i > 0) CHECK(record.plan_in == result.iterations[i - 1].plan_out);
            episodes += record.batch.size();
        }
        CHECK(episodes == 12);
    }

    TEST_CASE("episodes never see the plan they help produce") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::staged, suite);
        Spy spy(agent);
        auto config = heat_config(4, 1);
        config.workers = 4;
        std::vector<std::vector<std::string>> prompts_per_iteration;
        const auto result = optimize(config, suite, spy, [&](const IterationRecord&) {
            prompts_per_iteration.push_back(spy.prompts());
            spy.clear();
        });
        REQUIRE(prompts_per_iteration.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& record = result.iterations[i];
            const std::string seen = "\nPlan: " + record.plan_in.text() + "\nObservation: ";
            const std::string future = "\nPlan: " + record.plan_out.text() + "\nObservation: ";
            std::size_t history_prompts = 0;
            for (const auto& prompt : prompts_per_iteration[i]) {
                if (prompt.starts_with("Current plan:")) continue;
                ++history_prompts;
                CHECK(prompt.find(seen) != std::string::npos);
                if (record.plan_out.text() != record.plan_in.text()) CHECK(prompt.find(future) == std::string::npos);
            }
            CHECK(history_prompts > 0);
            for (const auto& item : record.batch) CHECK(item.episode.plan == record.plan_in);
        }
    }

    TEST_CASE("optimization is reproducible with fixed seeds, serial or parallel") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::staged, suite);
        auto config = heat_config(4, 9);
        const auto a = optimize(config, suite, backend);
        config.workers = 3;
        const auto b = optimize(config, suite, backend);
        REQUIRE(a.iterations.size() == b.iterations.size());
        for (std::size_t i = 0; i < a.iterations.size(); ++i) {
            CHECK(a.iterations[i].plan_out == b.iterations[i].plan_out);
            for (std::size_t j = 0; j < a.iterations[i].batch.size(); ++j) {
                CHECK(a.iterations[i].batch[j].episode == b.iterations[i].batch[j].episode);
                CHECK(a.iterations[i].batch[j].reflection == b.iterations[i].batch[j].reflection);
            }
        }
    }

    TEST_CASE("failed episodes are resampled to keep the batch full") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::oracle, suite);
        const auto pool = suite.instances(Split::train, "heat");
        const auto first = sample_instances(pool, 12, 4, 0);
        Faulty faulty(agent, "Task: " + first[0].id + "\n");
        const auto record = run_iteration(heat_config(4, 4), suite, faulty, Plan::empty("heat"), 0);
        CHECK_FALSE(record.failed);
        CHECK(record.batch.size() == 4);
        CHECK(record.resampled == 1);
        for (const auto& item : record.batch) CHECK(item.instance.id != first[0].id);
    }

    TEST_CASE("an update that fails keeps the plan and flags the iteration") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::oracle, suite);
        Faulty faulty(agent, "Current plan:");
        auto config = heat_config(2, 0);
        const auto result = optimize(config, suite, faulty);
        REQUIRE(result.iterations.size() == 3);
        for (const auto& record : result.iterations) {
            CHECK(record.failed);
            CHECK(record.plan_out == record.plan_in);
        }
        CHECK(result.final_plan.is_empty());
    }

    TEST_CASE("the QA environment optimizes one global plan") {
        const auto suite = qa::QASuite::bundled();
        sim::AgentBackend backend(sim::Policy::oracle, *suite);
        RunConfig config;
        config.env = EnvKind::qa;
        config.task_family = "qa";
        config.batch_size = 2;
        config.iterations = 1;
        const auto result = optimize(config, *suite, backend);
        CHECK(result.final_plan.task_family() == "qa");
        for (const auto& item : result.iterations[0].batch) CHECK(item.reward == 1);
    }
}

TEST_SUITE("evaluate") {
    TEST_CASE("the oracle agent scores 100% on every household test instance") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::oracle, suite, CostRates{0.001, 0.002});
        const auto instances = suite.instances(Split::test);
        const auto report = evaluate(std::map<std::string, Plan>{}, instances, suite, backend, RunConfig{});
        CHECK(report.rows.size() == 6);
        for (const auto& row : report.rows) {
            CHECK(row.total == 10);
            CHECK(row.successes == 10);
        }
        CHECK(report.overall.rate() == 1.0);

        UsageRecord sum;
        double row_cost = 0.0;
        for (const auto& episode : report.episodes) sum += episode.usage;
        for (const auto& row : report.rows) row_cost += row.cost;
        CHECK(report.usage.calls == sum.calls);
        CHECK(report.usage.input_chars == sum.input_chars);
        CHECK(report.usage.estimated_cost == doctest::Approx(sum.estimated_cost));
        CHECK(report.overall.cost == doctest::Approx(row_cost));
    }

    TEST_CASE("a toaster-first agent under the empty plan never heats anything") {
        const auto& suite = household_suite();
        sim::AgentBackend backend(sim::Policy::toaster, suite);
        const auto report = evaluate(Plan::empty("heat"), suite.instances(Split::test, "heat"), suite, backend, {});
        CHECK(report.overall.total == 10);
        CHECK(report.overall.successes == 0);
    }

    TEST_CASE("evaluation issues no reflection or update prompts") {
        const auto& suite = household_suite();
        sim::AgentBackend agent(sim::Policy::staged, suite);
        Spy spy(agent);
        evaluate(Plan::empty("heat"), suite.instances(Split::test, "heat"), suite, spy, {});
        for (const auto& prompt : spy.prompts()) {
            const auto kind = sim::classify_prompt(prompt);
            CHECK(kind != sim::PromptKind::summary);
            CHECK(kind != sim::PromptKind::flaw);
            CHECK(kind != sim::PromptKind::revision);
            CHECK(kind != sim::PromptKind::update);
        }
    }

    TEST_CASE("greedy evaluation through a replay cache is identical") {
        const auto& suite = household_suite();
        testing::TempDir dir("eval");
        sim::AgentBackend agent(sim::Policy::staged, suite);
        const auto instances = suite.instances(Split::test, "heat");
        EvalReport recorded;
        {
            ReplayCache cache(dir.path());
            RecordingBackend recorder(agent, cache);
            recorded = evaluate(Plan::empty("heat"), instances, suite, recorder, {});
        }
        ReplayBackend replay(dir.path());
        const auto replayed = evaluate(Plan::empty("heat"), instances, suite, replay, {});
        REQUIRE(replayed.episodes.size() == recorded.episodes.size());
        for (std::size_t i = 0; i < recorded.episodes.size(); ++i) {
            CHECK(replayed.episodes[i].steps == recorded.episodes[i].steps);
        }
    }
}
