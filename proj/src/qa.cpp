// SPDX-License-Identifier: Apache-2.0
#include "autoplan/qa.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "autoplan/assets.hpp"
#include "autoplan/episode_log.hpp"

namespace autoplan::qa {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string title_key(std::string_view title) { return normalize_whitespace(lower(title)); }

// Sorted, deduplicated trigrams of the padded key.
std::vector<std::string> trigrams(std::string_view text) {
    const std::string padded = "  " + title_key(text) + " ";
    std::set<std::string> grams;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) grams.insert(padded.substr(i, 3));
    return {grams.begin(), grams.end()};
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    const std::size_t total = a.size() + b.size() - common.size();
    return total == 0 ? 0.0 : static_cast<double>(common.size()) / static_cast<double>(total);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        if (!line.empty()) lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::string describe_question(const std::string& id, const Question& question) {
    return "Task: " + id +
           "\nAnswer the question by interacting with a document search tool. Available actions:\n"
           "search[entity]: shows the first sentences of the page titled entity, or similar titles if none matches.\n"
           "lookup[keyword]: shows the next sentence containing keyword on the current page.\n"
           "finish[answer]: submits the answer and ends the task.\n"
           "think: {your reasoning}\n"
           "Question: " +
           question.question;
}

}  // namespace

Corpus Corpus::from_jsonl(std::string_view text) {
    Corpus corpus;
    for (const auto& line : split_lines(text)) {
        const auto record = nlohmann::json::parse(line);
        Page page{record.at("title").get<std::string>(), record.at("sentences").get<std::vector<std::string>>()};
        if (page.sentences.empty()) throw std::invalid_argument("page '" + page.title + "' has no sentences");
        auto key = title_key(page.title);
        if (!corpus.by_key_.emplace(key, corpus.pages_.size()).second) {
            throw std::invalid_argument("duplicate page title '" + page.title + "'");
        }
        corpus.title_grams_.push_back(trigrams(page.title));
        corpus.pages_.push_back(std::move(page));
    }
    if (corpus.pages_.empty()) throw std::invalid_argument("the corpus is empty");
    return corpus;
}

Corpus Corpus::from_file(const std::filesystem::path& path) { return from_jsonl(read_text_file(path)); }

Corpus Corpus::bundled() { return from_jsonl(assets::get("data/qa/corpus.jsonl")); }

const Page* Corpus::find(std::string_view title) const {
    auto it = by_key_.find(title_key(title));
    return it == by_key_.end() ? nullptr : &pages_[it->second];
}

std::vector<std::string> Corpus::similar(std::string_view query, std::size_t k) const {
    const auto grams = trigrams(query);
    std::vector<double> scores(pages_.size());
    for (std::size_t i = 0; i < pages_.size(); ++i) scores[i] = jaccard(grams, title_grams_[i]);
    std::vector<std::size_t> order(pages_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    std::vector<std::string> titles;
    for (auto i : order) titles.push_back(pages_[i].title);
    return titles;
}

std::vector<Question> questions_from_jsonl(std::string_view text) {
    std::vector<Question> questions;
    for (const auto& line : split_lines(text)) {
        const auto record = nlohmann::json::parse(line);
        Question q;
        q.id = record.at("id").get<std::string>();
        q.question = record.at("question").get<std::string>();
        q.answer = record.at("answer").get<std::string>();
        q.pages = record.at("pages").get<std::vector<std::string>>();
        q.split = parse_split(record.at("split").get<std::string>());
        questions.push_back(std::move(q));
    }
    return questions;
}

std::vector<Question> bundled_questions() { return questions_from_jsonl(assets::get("data/qa/questions.jsonl")); }

std::string QAAction::str() const {
    switch (kind) {
        case ActionKind::search: return "search[" + argument + "]";
        case ActionKind::lookup: return "lookup[" + argument + "]";
        case ActionKind::finish: return "finish[" + argument + "]";
    }
    return {};
}

std::optional<QAAction> QAAction::parse(std::string_view canonical) {
    const auto open = canonical.find('[');
    if (open == std::string_view::npos || canonical.empty() || canonical.back() != ']') return std::nullopt;
    const auto verb = canonical.substr(0, open);
    const auto argument = canonical.substr(open + 1, canonical.size() - open - 2);
    if (argument.find_first_of("[]\n") != std::string_view::npos) return std::nullopt;
    if (trim(argument) != argument || argument.empty()) return std::nullopt;
    QAAction action;
    if (verb == "search") {
        action.kind = ActionKind::search;
    } else if (verb == "lookup") {
        action.kind = ActionKind::lookup;
    } else if (verb == "finish") {
        action.kind = ActionKind::finish;
    } else {
        return std::nullopt;
    }
    action.argument = std::string(argument);
    return action;
}

std::string normalize_answer(std::string_view answer) {
    std::string cleaned;
    for (unsigned char c : lower(answer)) {
        if (!std::ispunct(c)) cleaned += static_cast<char>(c);
    }
    std::string out;
    std::size_t start = 0;
    while (start < cleaned.size()) {
        while (start < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[start]))) ++start;
        auto end = start;
        while (end < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[end]))) ++end;
        const auto word = cleaned.substr(start, end - start);
        if (!word.empty() && word != "a" && word != "an" && word != "the") {
            if (!out.empty()) out += ' ';
            out += word;
        }
        start = end;
    }
    return out;
}

std::string Browser::search(std::string_view entity) {
    if (const Page* page = corpus_.find(entity)) {
        page_ = page;
        keyword_.clear();
        next_match_ = 0;
        std::string out;
        const auto shown = std::min<std::size_t>(5, page->sentences.size());
        for (std::size_t i = 0; i < shown; ++i) {
            if (i > 0) out += ' ';
            out += page->sentences[i];
        }
        return out;
    }
    std::string out = "Could not find " + trim(entity) + ". Similar: [";
    const auto titles = corpus_.similar(entity, 5);
    for (std::size_t i = 0; i < titles.size(); ++i) {
        if (i > 0) out += ", ";
        out += "'" + titles[i] + "'";
    }
    return out + "].";
}

std::string Browser::lookup(std::string_view keyword) {
    if (page_ == nullptr) return std::string(kSearchFirst);
    const auto needle = lower(keyword);
    if (needle != keyword_) {
        keyword_ = needle;
        next_match_ = 0;
    }
    std::vector<std::size_t> matches;
    for (std::size_t i = 0; i < page_->sentences.size(); ++i) {
        if (lower(page_->sentences[i]).find(needle) != std::string::npos) matches.push_back(i);
    }
    if (next_match_ >= matches.size()) return std::string(kNoMoreResults);
    const auto k = next_match_++;
    return "(Result " + std::to_string(k + 1) + " / " + std::to_string(matches.size()) + ") " +
           page_->sentences[matches[k]];
}

std::string QAEnvironment::reset(const TaskInstance& instance) {
    question_ = &suite_.question(instance.id);
    browser_.emplace(suite_.corpus());
    finished_ = false;
    correct_ = false;
    return {};
}

Transition QAEnvironment::step(std::string_view canonical_action) {
    if (!question_) throw std::logic_error("step() before reset()");
    if (finished_) throw std::logic_error("step() after finish");
    Transition transition;
    auto action = canonical_action == kInvalidAction ? std::nullopt : QAAction::parse(canonical_action);
    if (!action) {
        transition.observation = std::string(kInvalidQAAction);
        transition.valid = false;
        return transition;
    }
    switch (action->kind) {
        case ActionKind::search: transition.observation = browser_->search(action->argument); break;
        case ActionKind::lookup: transition.observation = browser_->lookup(action->argument); break;
        case ActionKind::finish:
            finished_ = true;
            correct_ = normalize_answer(action->argument) == normalize_answer(question_->answer);
            transition.observation = correct_ ? "Episode finished. The answer is correct."
                                              : "Episode finished. The answer is incorrect.";
            transition.done = true;
            transition.reward = correct_ ? 1 : 0;
            break;
    }
    return transition;
}

QASuite::QASuite(Corpus corpus, std::vector<Question> questions)
    : corpus_(std::move(corpus)), questions_(std::move(questions)) {
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        const auto& q = questions_[i];
        for (const auto& title : q.pages) {
            if (!corpus_.find(title)) throw std::invalid_argument("question " + q.id + " cites missing page '" + title + "'");
        }
        TaskInstance instance;
        instance.id = "qa-" + q.id;
        instance.task_family = "qa";
        instance.env_seed = i;
        instance.split = q.split;
        instance.description = describe_question(instance.id, q);
        if (!by_id_.emplace(instance.id, catalog_.size()).second) {
            throw std::invalid_argument("duplicate question id " + q.id);
        }
        catalog_.push_back(std::move(instance));
    }
}

std::unique_ptr<QASuite> QASuite::bundled() {
    return std::make_unique<QASuite>(Corpus::bundled(), bundled_questions());
}

std::vector<TaskInstance> QASuite::instances(Split split, std::string_view task_family) const {
    std::vector<TaskInstance> out;
    if (!task_family.empty() && task_family != "qa") return out;
    for (const auto& instance : catalog_) {
        if (instance.split == split) out.push_back(instance);
    }
    return out;
}

std::unique_ptr<Environment> QASuite::make_environment() const { return std::make_unique<QAEnvironment>(*this); }

const TaskInstance& QASuite::find(std::string_view id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw UnknownInstanceError(std::string(id));
    return catalog_[it->second];
}

const Question& QASuite::question(std::string_view instance_id) const {
    auto it = by_id_.find(instance_id);
    if (it == by_id_.end()) throw UnknownInstanceError(std::string(instance_id));
    return questions_[it->second];
}

}  // namespace autoplan::qa
