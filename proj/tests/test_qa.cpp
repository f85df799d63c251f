// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "autoplan/optimizer.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/scripted_backend.hpp"

using namespace autoplan;
using namespace autoplan::qa;

namespace {

std::string page_line(const std::string& title, const std::vector<std::string>& sentences) {
    return nlohmann::json{{"title", title}, {"sentences", sentences}}.dump() + "\n";
}

std::vector<std::string> numbered(const std::string& stem, int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back(stem + " sentence " + std::to_string(i) + ".");
    return out;
}

Corpus fixture() {
    std::string text;
    text += page_line("Long Page", numbered("Long", 8));
    text += page_line("Short Page", numbered("Short", 3));
    text += page_line("River Page", {"The river is wide.", "Boats sail here.", "The river floods in spring.",
                                     "Fish live in the river."});
    text += page_line("Mountain Page", {"The peak is high.", "The river starts here."});
    text += page_line("Lake Page", {"Calm water."});
    text += page_line("Desert Page", {"Dry sand."});
    return Corpus::from_jsonl(text);
}

std::vector<std::string> suggestions(const std::string& observation) {
    std::vector<std::string> out;
    const auto open = observation.find('[');
    const auto close = observation.rfind(']');
    REQUIRE(open != std::string::npos);
    REQUIRE(close != std::string::npos);
    std::size_t pos = open;
    while ((pos = observation.find('\'', pos + 1)) != std::string::npos && pos < close) {
        const auto end = observation.find('\'', pos + 1);
        out.push_back(observation.substr(pos + 1, end - pos - 1));
        pos = end;
    }
    return out;
}

}  // namespace

TEST_SUITE("qa") {
    TEST_CASE("search shows at most the first five sentences") {
        const auto corpus = fixture();
        Browser browser(corpus);
        const auto long_page = numbered("Long", 8);
        CHECK(browser.search("Long Page") == long_page[0] + " " + long_page[1] + " " + long_page[2] + " " +
                                                 long_page[3] + " " + long_page[4]);
        const auto short_page = numbered("Short", 3);
        CHECK(browser.search("short page") == short_page[0] + " " + short_page[1] + " " + short_page[2]);
        CHECK(browser.current_page()->title == "Short Page");
    }

    TEST_CASE("a miss lists exactly five suggestions when enough titles exist") {
        const auto corpus = fixture();
        Browser browser(corpus);
        browser.search("Long Page");
        const auto observation = browser.search("Rivr Pag");
        CHECK(observation.starts_with("Could not find Rivr Pag."));
        const auto titles = suggestions(observation);
        CHECK(titles.size() == 5);
        CHECK(titles.front() == "River Page");
        CHECK(browser.current_page()->title == "Long Page");
    }

    TEST_CASE("misspelled titles rank the intended page in the top five") {
        const auto corpus = Corpus::bundled();
        const std::vector<std::pair<std::string, std::string>> typos{
            {"Neil Armstong", "Neil Armstrong"},   {"Eifel Tower", "Eiffel Tower"},
            {"Albert Einstien", "Albert Einstein"}, {"Charles Darwn", "Charles Darwin"},
            {"Mount Everst", "Mount Everest"},      {"Linus Torvals", "Linus Torvalds"},
            {"Marie Currie", "Marie Curie"},        {"Golden Gate Brige", "Golden Gate Bridge"},
            {"Alan Turring", "Alan Turing"},        {"Sydney Opra House", "Sydney Opera House"},
        };
        for (const auto& [typo, title] : typos) {
            const auto ranked = corpus.similar(typo, 5);
            CHECK(ranked.size() == 5);
            CHECK_MESSAGE(std::find(ranked.begin(), ranked.end(), title) != ranked.end(), typo);
        }
    }

    TEST_CASE("lookup walks matches in page order and restarts on a new keyword or page") {
        const auto corpus = fixture();
        Browser browser(corpus);
        CHECK(browser.lookup("river") == kSearchFirst);
        browser.search("River Page");
        CHECK(browser.lookup("floods") == "(Result 1 / 1) The river floods in spring.");
        CHECK(browser.lookup("River") == "(Result 1 / 3) The river is wide.");
        CHECK(browser.lookup("river") == "(Result 2 / 3) The river floods in spring.");
        CHECK(browser.lookup("river") == "(Result 3 / 3) Fish live in the river.");
        CHECK(browser.lookup("river") == kNoMoreResults);
        CHECK(browser.lookup("volcano") == kNoMoreResults);

        browser.search("Mountain Page");
        CHECK(browser.lookup("river") == "(Result 1 / 1) The river starts here.");
    }

    TEST_CASE("two occurrences come back in order") {
        const auto corpus = Corpus::from_jsonl(page_line("Twice", {"Alpha one.", "Nothing.", "Alpha two."}));
        Browser browser(corpus);
        browser.search("Twice");
        CHECK(browser.lookup("alpha") == "(Result 1 / 2) Alpha one.");
        CHECK(browser.lookup("alpha") == "(Result 2 / 2) Alpha two.");
        CHECK(browser.lookup("alpha") == kNoMoreResults);
    }

    TEST_CASE("corpus validation") {
        CHECK_THROWS_AS(Corpus::from_jsonl(""), std::invalid_argument);
        CHECK_THROWS_AS(Corpus::from_jsonl(page_line("A", {"x."}) + page_line("A", {"y."})), std::invalid_argument);
        CHECK_THROWS_AS(Corpus::from_jsonl(page_line("A", {})), std::invalid_argument);
    }

    TEST_CASE("action grammar") {
        CHECK(QAAction::parse("search[Apollo 11]") == QAAction{ActionKind::search, "Apollo 11"});
        CHECK(QAAction::parse("lookup[born]") == QAAction{ActionKind::lookup, "born"});
        CHECK(QAAction::parse("finish[Ohio]") == QAAction{ActionKind::finish, "Ohio"});
        CHECK_FALSE(QAAction::parse("finish[]").has_value());
        CHECK_FALSE(QAAction::parse("finish[  ]").has_value());
        CHECK_FALSE(QAAction::parse("search Apollo").has_value());
        CHECK(QAAction{ActionKind::lookup, "x"}.str() == "lookup[x]");
    }

    TEST_CASE("answers compare after normalization") {
        CHECK(normalize_answer("The  Beatles!") == "beatles");
        CHECK(normalize_answer("an Apple") == "apple");
        CHECK(normalize_answer("Ohio") == normalize_answer("ohio."));
    }

    TEST_CASE("bundled questions resolve to bundled pages") {
        const auto suite = QASuite::bundled();
        CHECK(suite->corpus().size() >= 50);
        const auto test = suite->instances(Split::test);
        const auto train = suite->instances(Split::train);
        CHECK_FALSE(test.empty());
        CHECK_FALSE(train.empty());
        for (const auto& instance : test) {
            CHECK(instance.description.starts_with("Task: " + instance.id + "\n"));
            CHECK(instance.task_family == "qa");
        }
    }

    TEST_CASE("finish closes the episode with a binary reward") {
        const auto suite = QASuite::bundled();
        const auto& instance = suite->find("qa-q001");
        for (const auto& [answer, reward] : std::vector<std::pair<std::string, int>>{{"ohio", 1}, {"Texas", 0}}) {
            auto env = suite->make_environment();
            CHECK(env->reset(instance).empty());
            CHECK(env->step("search[Neil Armstrong]").observation.find("Wapakoneta") != std::string::npos);
            CHECK(env->step(kInvalidAction).observation == kInvalidQAAction);
            const auto t = env->step("finish[" + answer + "]");
            CHECK(t.done);
            CHECK(t.reward == reward);
            CHECK(env->goal_reached() == (reward == 1));
        }
    }

    TEST_CASE("episodes stop at ten steps") {
        const auto suite = QASuite::bundled();
        ScriptedBackend backend({ends_with_rule("Action:", {"search[Atlantis]"})}, "I should keep searching.");
        RunConfig config;
        config.env = EnvKind::qa;
        const CollectOptions options{config.effective_max_steps(), {}};
        const auto episode = collect_episode(*suite, backend, Plan::empty("qa"), suite->find("qa-q001"),
                                             SamplingConfig::greedy(), options);
        CHECK(episode.steps.size() == 10);
        CHECK(episode.terminated_by == TerminatedBy::step_limit);
        CHECK(episode.reward == 0);
    }
}
