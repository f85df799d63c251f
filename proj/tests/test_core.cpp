// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "autoplan/core.hpp"
#include "autoplan/episode_log.hpp"
#include "autoplan/prompts.hpp"
#include "support.hpp"

using namespace autoplan;

namespace {

TaskInstance sample_instance() {
    return {"heat-train-3", "heat", "Task: heat-train-3\nYour task is to: heat some egg and put it in fridge.", 3,
            Split::train};
}

Step action_step(std::string action, std::string observation, std::optional<std::string> thought = {}) {
    Step step;
    step.thought = std::move(thought);
    step.raw_action = action;
    step.action = std::move(action);
    step.observation = std::move(observation);
    return step;
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("enum spellings round-trip") {
        for (auto s : {Split::train, Split::test}) CHECK(parse_split(to_string(s)) == s);
        for (auto e : {EnvKind::household, EnvKind::qa}) CHECK(parse_env_kind(to_string(e)) == e);
        for (auto m : {SamplingMode::greedy, SamplingMode::nucleus}) CHECK(parse_sampling_mode(to_string(m)) == m);
        for (auto r : {ReflectionMode::full, ReflectionMode::summary_only}) {
            CHECK(parse_reflection_mode(to_string(r)) == r);
        }
        for (auto t : {TerminatedBy::goal, TerminatedBy::finish, TerminatedBy::step_limit, TerminatedBy::error}) {
            CHECK(parse_terminated_by(to_string(t)) == t);
        }
        CHECK_THROWS_AS(parse_split("dev"), std::invalid_argument);
        CHECK_THROWS_AS(parse_env_kind("webshop"), std::invalid_argument);
    }

    TEST_CASE("empty plan only at iteration zero") {
        const Plan empty = Plan::empty("heat");
        CHECK(empty.is_empty());
        CHECK(empty.iteration() == 0);
        CHECK(empty.text() == kEmptyPlanText);
        CHECK_THROWS_AS(Plan::make("1. go to microwave 1", 0, "heat"), std::invalid_argument);
        CHECK_THROWS_AS(Plan::make(std::string(kEmptyPlanText), 2, "heat"), std::invalid_argument);
        CHECK_THROWS_AS(Plan::make("  \n ", 1, "heat"), std::invalid_argument);

        const Plan v1 = empty.next("1. take the object\n2. heat it");
        CHECK(v1.iteration() == 1);
        CHECK(v1.task_family() == "heat");
        CHECK_FALSE(v1.is_empty());
        CHECK(v1.next("x").iteration() == 2);
    }

    TEST_CASE("plan text is cut at a line boundary within the budget") {
        const Plan plan = Plan::make("line one\nline two\nline three", 1, "pick", 20);
        CHECK(plan.text() == "line one\nline two");
        CHECK(plan.text().size() <= 20);
    }

    TEST_CASE("history prompt layout") {
        const auto instance = sample_instance();
        const Plan plan = Plan::make("1. find the egg", 1, "heat");
        const std::vector<Step> steps{
            action_step("go to countertop 1", "On the countertop 1, you see a egg 1.", "I need the egg."),
            action_step("think: the egg is here", "OK."),
        };
        std::string expected = instance.description + "\nPlan: 1. find the egg\nObservation: You are in a room." +
                               "\nThink: I need the egg.\nAction: go to countertop 1\nObservation: On the countertop "
                               "1, you see a egg 1." +
                               "\nThink: the egg is here\nObservation: OK.";
        CHECK(assemble_history_prompt(instance, plan, "You are in a room.", steps) == expected);
    }

    TEST_CASE("invalid actions are shown as the agent wrote them") {
        Step step;
        step.raw_action = "grab the egg";
        step.action = std::string(kInvalidAction);
        step.observation = "Nothing happens.";
        const auto prompt = assemble_history_prompt(sample_instance(), Plan::empty("heat"), "o0", std::vector{step});
        CHECK(prompt.ends_with("\nAction: grab the egg\nObservation: Nothing happens."));
    }

    TEST_CASE("over-budget histories drop the oldest steps and keep the head") {
        const auto instance = sample_instance();
        const Plan plan = Plan::empty("heat");
        std::vector<Step> steps;
        for (int i = 0; i < 40; ++i) {
            steps.push_back(action_step("go to cabinet " + std::to_string(i + 1), std::string(60, 'x')));
        }
        PromptBudget budget;
        budget.max_prompt_tokens = 200;
        budget.chars_per_token = 4;
        const auto prompt = assemble_history_prompt(instance, plan, "start", steps, budget);
        CHECK(prompt.size() <= budget.prompt_chars());
        CHECK(prompt.starts_with(instance.description + "\nPlan: " + std::string(kEmptyPlanText) +
                                 "\nObservation: start\n" + std::string(kElisionMarker)));
        CHECK(prompt.find("go to cabinet 40") != std::string::npos);
        CHECK(prompt.find("go to cabinet 1\n") == std::string::npos);

        const auto full = assemble_history_prompt(instance, plan, "start", steps);
        CHECK(full.find(std::string(kElisionMarker)) == std::string::npos);
    }

    TEST_CASE("whitespace helpers") {
        CHECK(normalize_whitespace("  a \t b\n\nc  ") == "a b c");
        CHECK(normalize_whitespace("") == "");
        CHECK(trim("\n x y \t") == "x y");
    }

    TEST_CASE("usage records add up") {
        UsageRecord a{"m", 1, 10, 2, 0.5};
        const UsageRecord b{"m", 2, 5, 3, 0.25};
        a += b;
        CHECK(a == UsageRecord{"m", 3, 15, 5, 0.75});
    }

    TEST_CASE("default step caps") {
        CHECK(default_max_steps(EnvKind::household) == 35);
        CHECK(default_max_steps(EnvKind::qa) == 10);
        RunConfig config;
        config.env = EnvKind::qa;
        CHECK(config.effective_max_steps() == 10);
        config.max_steps = 4;
        CHECK(config.effective_max_steps() == 4);
    }
}

TEST_SUITE("prompts") {
    TEST_CASE("templates are stored verbatim") {
        CHECK(prompt_template("thought") ==
              "Identify which step of plan you are at. Show your thought about the one next action. Your thought "
              "should be faithful the plan step.");
        CHECK(prompt_template("summary") == "Summarize the interaction history in steps.");
        CHECK(prompt_template("flaw") ==
              "Identify all flawed parts of the plan/action. Remember in this game, things are not like real world. "
              "The system message in observation is always correct and the plan plan/action may have flaws.");
        CHECK(prompt_template("revision") ==
              "Suggest revision to the current flawed part of the plan. Only the flawed part.");
        CHECK(prompt_template("update") ==
              "Based on the above experiences of the game, rewrite the current game plan. Pay attention to summary "
              "of successful jobs, and flawed actions and suggested revision of all jobs. The plan should be "
              "generalizable to all job objectives. The actions in the plan should also be in the form as in game "
              "description.");
    }

    TEST_CASE("placeholders must be bound") {
        CHECK_THROWS_AS(render_prompt("formalizer-household"), PromptError);
        const auto text = render_prompt("formalizer-household", {{"raw_action", "grab egg 1"}});
        CHECK(text.ends_with("Raw action: grab egg 1\nFormatted action:\n"));
        CHECK_THROWS_AS(prompt_template("nope"), PromptError);
        CHECK(prompt_template_names().size() == 7);
    }
}

TEST_SUITE("episode_log") {
    TEST_CASE("episodes survive a JSON lines round trip") {
        Episode episode;
        episode.instance = sample_instance();
        episode.plan = Plan::make("1. step", 2, "heat");
        episode.initial_observation = "o0";
        episode.steps = {action_step("go to fridge 1", "The fridge 1 is closed.", "go cool"),
                         action_step("think: hmm", "OK.")};
        episode.reward = 1;
        episode.terminated_by = TerminatedBy::goal;
        episode.usage = {"sim", 4, 100, 20, 0.01};

        CHECK(episode_from_line(episode_to_line(episode)) == episode);

        testing::TempDir dir("log");
        write_episode_log(dir / "e.jsonl", {episode, episode});
        const auto back = read_episode_log(dir / "e.jsonl");
        REQUIRE(back.size() == 2);
        CHECK(back[1] == episode);
        CHECK(episode_to_line(episode).find('\n') == std::string::npos);
    }
}
