// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>

#include "autoplan/env.hpp"

namespace autoplan::qa {

struct Page {
    std::string title;
    std::vector<std::string> sentences;
};

// Immutable title -> sentences store with a character-trigram title index.
class Corpus {
public:
    // One {"title", "sentences"} object per line. Throws std::invalid_argument
    // on an empty corpus, duplicate titles or pages without sentences.
    static Corpus from_jsonl(std::string_view text);
    static Corpus from_file(const std::filesystem::path& path);
    static Corpus bundled();

    // Case-insensitive exact title match after trimming.
    const Page* find(std::string_view title) const;

    // Titles ranked by trigram Jaccard similarity to `query`, ties broken by
    // corpus order. Returns min(k, size()) titles.
    std::vector<std::string> similar(std::string_view query, std::size_t k = 5) const;

    std::size_t size() const { return pages_.size(); }
    const std::vector<Page>& pages() const { return pages_; }

private:
    std::vector<Page> pages_;
    std::map<std::string, std::size_t, std::less<>> by_key_;
    std::vector<std::vector<std::string>> title_grams_;
};

struct Question {
    std::string id;
    std::string question;
    std::string answer;
    std::vector<std::string> pages;
    Split split = Split::train;
};

std::vector<Question> questions_from_jsonl(std::string_view text);
std::vector<Question> bundled_questions();

enum class ActionKind { search, lookup, finish };

struct QAAction {
    ActionKind kind = ActionKind::search;
    std::string argument;  // never blank

    std::string str() const;  // "search[...]", "lookup[...]", "finish[...]"
    // Strict parse of the canonical bracket forms.
    static std::optional<QAAction> parse(std::string_view canonical);
    bool operator==(const QAAction&) const = default;
};

// Lowercase, drop punctuation and the articles a/an/the, collapse spaces.
std::string normalize_answer(std::string_view answer);

// Search/lookup cursor over a shared corpus. One per episode.
class Browser {
public:
    explicit Browser(const Corpus& corpus) : corpus_(corpus) {}

    // Exact hit: up to five leading sentences, and the page becomes current.
    // Miss: a five-title suggestion list; the current page is unchanged.
    std::string search(std::string_view entity);

    // Next sentence of the current page containing `keyword`. The cursor
    // restarts whenever the page or the keyword changes.
    std::string lookup(std::string_view keyword);

    const Page* current_page() const { return page_; }

private:
    const Corpus& corpus_;
    const Page* page_ = nullptr;
    std::string keyword_;
    std::size_t next_match_ = 0;
};

class QASuite;

class QAEnvironment final : public Environment {
public:
    explicit QAEnvironment(const QASuite& suite) : suite_(suite) {}

    // o_0 is empty: the question is part of the description.
    std::string reset(const TaskInstance& instance) override;
    Transition step(std::string_view canonical_action) override;
    bool goal_reached() const override { return correct_; }

private:
    const QASuite& suite_;
    const Question* question_ = nullptr;
    std::optional<Browser> browser_;
    bool finished_ = false;
    bool correct_ = false;
};

class QASuite final : public EnvironmentSuite {
public:
    QASuite(Corpus corpus, std::vector<Question> questions);
    static std::unique_ptr<QASuite> bundled();

    EnvKind kind() const override { return EnvKind::qa; }
    std::vector<TaskInstance> instances(Split split, std::string_view task_family = {}) const override;
    std::vector<std::string> task_families() const override { return {"qa"}; }
    std::unique_ptr<Environment> make_environment() const override;
    const TaskInstance& find(std::string_view id) const override;

    const Corpus& corpus() const { return corpus_; }
    const std::vector<Question>& questions() const { return questions_; }
    const Question& question(std::string_view instance_id) const;

private:
    Corpus corpus_;
    std::vector<Question> questions_;
    std::vector<TaskInstance> catalog_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

inline constexpr std::string_view kNoMoreResults = "No more results.";
inline constexpr std::string_view kSearchFirst = "No page is open. Use search[entity] first.";
inline constexpr std::string_view kInvalidQAAction =
    "Invalid action. Valid actions are search[entity], lookup[keyword] and finish[answer].";

}  // namespace autoplan::qa
