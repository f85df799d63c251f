// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "autoplan/formalizer.hpp"
#include "autoplan/scripted_backend.hpp"

using namespace autoplan;

namespace {

struct CorpusItem {
    EnvKind env;
    std::string raw;
    std::string expected;
};

std::vector<CorpusItem> load_corpus() {
    std::ifstream in(std::string(AUTOPLAN_TEST_DATA) + "/formalizer_corpus.jsonl");
    REQUIRE(in.good());
    std::vector<CorpusItem> items;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        items.push_back({parse_env_kind(j.at("env").get<std::string>()), j.at("raw"), j.at("expected")});
    }
    return items;
}

}  // namespace

TEST_SUITE("formalizer") {
    TEST_CASE("the curated corpus is handled by the rule parser") {
        const auto items = load_corpus();
        REQUIRE(items.size() == 100);
        std::size_t handled = 0;
        for (const auto& item : items) {
            const auto out = rule_formalize(item.raw, item.env);
            if (out && *out == item.expected) {
                ++handled;
            } else if (out) {
                // A wrong mapping is worse than none: the fallback never runs.
                FAIL_CHECK("rule parser mis-mapped '" << item.raw << "' to '" << *out << "'");
            }
        }
        MESSAGE("rule parser handled " << handled << " / " << items.size());
        CHECK(handled >= 95);
    }

    TEST_CASE("formalizing is idempotent") {
        for (const auto& item : load_corpus()) {
            REQUIRE_MESSAGE(is_canonical(item.expected, item.env), item.expected);
            const auto again = rule_formalize(item.expected, item.env);
            REQUIRE(again.has_value());
            CHECK(*again == item.expected);
            if (const auto out = rule_formalize(item.raw, item.env)) {
                CHECK(rule_formalize(*out, item.env) == out);
            }
        }
    }

    TEST_CASE("thoughts are recognized and never formalized") {
        CHECK(as_thought("Think: the egg is in the fridge") == "think: the egg is in the fridge");
        CHECK(as_thought("thought: go on") == "think: go on");
        CHECK(as_thought("think[check the plan]") == "think: check the plan");
        CHECK_FALSE(as_thought("go to fridge 1").has_value());
        CHECK_FALSE(as_thought("Think:").has_value());
    }

    TEST_CASE("the backend is consulted only when the rules fail") {
        ScriptedBackend backend({ends_with_rule("Formatted action:\n", {"heat potato 1 with microwave 1"})});
        Formalizer formalizer(EnvKind::household, &backend);

        const auto ruled = formalizer.formalize("go to the fridge 1");
        CHECK(ruled.action == "go to fridge 1");
        CHECK_FALSE(ruled.used_backend);
        CHECK(backend.usage().calls == 0);

        const auto fallback = formalizer.formalize("zap spud 1 inside oven thing");
        CHECK(fallback.used_backend);
        CHECK(fallback.action == "heat potato 1 with microwave 1");
        CHECK(fallback.usage.calls == 1);
    }

    TEST_CASE("unusable fallback output becomes the invalid-action marker") {
        ScriptedBackend chatty({}, "I am not sure what you mean.");
        CHECK(Formalizer(EnvKind::household, &chatty).formalize("do a barrel roll").action == kInvalidAction);
        ScriptedBackend silent({}, "\n");
        CHECK(Formalizer(EnvKind::qa, &silent).formalize("hmm").action == kInvalidAction);
        CHECK(Formalizer(EnvKind::qa, nullptr).formalize("hmm").action == kInvalidAction);
    }

    TEST_CASE("the fallback prompt carries the raw action") {
        std::string seen;
        ScriptRule capture{"capture", [&seen](std::string_view p) {
                               seen = std::string(p);
                               return true;
                           },
                           [](std::string_view) { return std::vector<std::string>{"finish[Rome]"}; }};
        ScriptedBackend backend({capture});
        CHECK(Formalizer(EnvKind::qa, &backend).formalize("my guess: Rome, I suppose").action == "finish[Rome]");
        CHECK(seen.ends_with("Raw action: my guess: Rome, I suppose\nFormatted action:\n"));
    }
}
