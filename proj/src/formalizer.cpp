// SPDX-License-Identifier: Apache-2.0
#include "autoplan/formalizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include "autoplan/household.hpp"
#include "autoplan/prompts.hpp"
#include "autoplan/qa.hpp"

namespace autoplan {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string first_line(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find('\n', begin);
    return trim(text.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
}

std::string strip_label(std::string text) {
    static const std::regex label(R"(^\s*(?:>\s*)*(?:(?:next\s+)?action\s*\d*\s*:\s*)?(?:>\s*)*)", std::regex::icase);
    return std::regex_replace(text, label, "", std::regex_constants::format_first_only);
}

// ---- household -------------------------------------------------------------

std::string household_normalize(std::string_view raw) {
    std::string text = lower(strip_label(first_line(raw)));
    for (std::size_t pos = text.find("in/on"); pos != std::string::npos; pos = text.find("in/on", pos)) {
        text.replace(pos, 5, " inon ");
    }
    for (auto& c : text) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = ' ';
    }
    static const std::array<std::string_view, 10> numbers{"one", "two",   "three", "four", "five",
                                                          "six", "seven", "eight", "nine", "ten"};
    static const std::array<std::string_view, 8> dropped{"the", "a", "an", "some", "my", "your", "that", "this"};
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
        while (start < text.size() && text[start] == ' ') ++start;
        auto end = text.find(' ', start);
        if (end == std::string::npos) end = text.size();
        std::string word = text.substr(start, end - start);
        start = end;
        if (word.empty()) continue;
        if (std::find(dropped.begin(), dropped.end(), word) != dropped.end()) continue;
        if (auto it = std::find(numbers.begin(), numbers.end(), word); it != numbers.end()) {
            word = std::to_string(it - numbers.begin() + 1);
        }
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

struct HouseholdPattern {
    household::Verb verb;
    std::regex re;
    int object_group;      // 0: none
    int receptacle_group;  // name group; the index follows it
    int verb_group = 0;    // transform verbs read the verb from this group
};

const std::vector<HouseholdPattern>& household_patterns() {
    using household::Verb;
    static const std::string ref = R"(([a-z]+)(?: (\d+))?)";
    static const std::vector<HouseholdPattern> patterns{
        {Verb::take,
         std::regex(R"(\b(?:take|pick up|pick|grab|get|collect|retrieve|remove) )" + ref +
                    R"((?: up| out)? (?:from|off of|off|out of|in|on|inside|at) )" + ref),
         1, 3},
        {Verb::put,
         std::regex(R"(\b(?:put|place|drop|set|leave|move|insert|store|return|bring|carry)(?: down| back)? )" + ref +
                    R"((?: down| back| it| over)? (?:inon|into|onto|in|on|inside|to|at) )" + ref),
         1, 3},
        {Verb::heat,
         std::regex(R"(\b(heat up|heat|warm up|warm|nuke|cool down|cool|chill|clean|wash|rinse) )" + ref +
                    R"((?: up| down| off)? (?:with|using|in|on|at|inside) )" + ref),
         2, 4, 1},
        {Verb::go, std::regex(R"(\b(?:go|walk|move|head|navigate|proceed|return|travel|get)(?: back| over)? to )" + ref), 0,
         1},
        {Verb::open, std::regex(R"(\bopen )" + ref), 0, 1},
        {Verb::close, std::regex(R"(\b(?:close|shut) )" + ref), 0, 1},
        {Verb::use, std::regex(R"(\b(?:use|turn on|switch on|toggle|activate) )" + ref), 0, 1},
    };
    return patterns;
}

household::Verb transform_verb(const std::string& word) {
    using household::Verb;
    if (word.starts_with("heat") || word.starts_with("warm") || word == "nuke") return Verb::heat;
    if (word.starts_with("cool") || word == "chill") return Verb::cool;
    return Verb::clean;
}

std::optional<household::Ref> ref_from(const std::smatch& m, int group) {
    household::Ref ref{m[group].str(), std::nullopt};
    if (m[group + 1].matched) {
        const int index = std::stoi(m[group + 1].str());
        if (index <= 0) return std::nullopt;
        ref.index = index;
    }
    return ref;
}

std::optional<std::string> household_rules(std::string_view raw) {
    if (auto strict = household::HouseholdAction::parse(trim(raw))) return strict->str();
    const std::string text = household_normalize(raw);
    std::optional<household::HouseholdAction> best;
    std::ptrdiff_t best_pos = -1;
    for (const auto& pattern : household_patterns()) {
        std::smatch m;
        if (!std::regex_search(text, m, pattern.re)) continue;
        if (best && m.position(0) >= best_pos) continue;
        household::HouseholdAction action;
        action.verb = pattern.verb_group ? transform_verb(m[pattern.verb_group].str()) : pattern.verb;
        if (pattern.object_group) {
            action.object = ref_from(m, pattern.object_group);
            if (!action.object) continue;
        }
        action.receptacle = ref_from(m, pattern.receptacle_group);
        if (!action.receptacle) continue;
        best = std::move(action);
        best_pos = m.position(0);
    }
    if (!best) return std::nullopt;
    auto canonical = best->str();
    if (!household::HouseholdAction::parse(canonical)) return std::nullopt;
    return canonical;
}

// ---- qa --------------------------------------------------------------------

std::optional<std::string> clean_argument(std::string text) {
    text = trim(text);
    while (!text.empty() && (text.back() == '.' || text.back() == '!' || text.back() == '?')) {
        text.pop_back();
        text = trim(text);
    }
    static const std::array<std::pair<std::string_view, std::string_view>, 4> quotes{
        {{"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"[", "]"}}};
    for (const auto& [open, close] : quotes) {
        if (text.size() >= open.size() + close.size() && text.starts_with(open) && text.ends_with(close)) {
            text = trim(text.substr(open.size(), text.size() - open.size() - close.size()));
        }
    }
    if (text.empty() || text.find_first_of("[]") != std::string::npos) return std::nullopt;
    return text;
}

std::optional<std::string> qa_rules(std::string_view raw) {
    if (auto strict = qa::QAAction::parse(trim(raw))) return strict->str();
    const std::string text = strip_label(first_line(raw));
    static const auto flags = std::regex::ECMAScript | std::regex::icase;
    static const std::regex bracket(R"(\b(search|lookup|look up|finish|answer)\s*\[\s*([^\[\]]+?)\s*\])", flags);
    static const std::regex search(
        R"(\bsearch(?:ing)?(?: for)?(?: the)?(?: (?:entity|page|article|wikipedia page|term|title))?(?: (?:about|on|of|called|named))?:? (.+))",
        flags);
    static const std::regex lookup(R"(\blook ?(?:ing )?up(?: the)?(?: (?:keyword|string|word|term|phrase))?:? (.+))",
                                   flags);
    static const std::regex answer(R"(\b(?:the )?(?:final )?answer is:? (.+))", flags);
    static const std::regex finish(R"(\bfinish(?: with)?(?: (?:the )?answer)?:? (.+))", flags);
    // Hedged answers: only the last clause counts, so earlier guesses are skipped.
    static const std::regex belief(R"(\bi (?:think|believe|am sure|'m sure) (?:it is|it's|it must be) ([^;,]+)$)", flags);
    static const std::regex article(
        R"(\b(?:check|read|open|visit)(?: the)? (?:article|page|entry|wikipedia page) (?:about|on|for|of) (.+?)(?: first| next| now)?$)",
        flags);

    std::smatch m;
    if (std::regex_search(text, m, bracket)) {
        const auto verb = lower(m[1].str());
        const std::string kind = verb == "look up" ? "lookup" : verb == "answer" ? "finish" : verb;
        if (auto arg = clean_argument(m[2].str())) return kind + "[" + *arg + "]";
        return std::nullopt;
    }
    struct Candidate {
        const std::regex* re;
        std::string_view kind;
    };
    const std::array<Candidate, 6> candidates{{{&answer, "finish"},
                                               {&finish, "finish"},
                                               {&belief, "finish"},
                                               {&search, "search"},
                                               {&article, "search"},
                                               {&lookup, "lookup"}}};
    std::optional<std::string> best;
    std::ptrdiff_t best_pos = -1;
    for (const auto& candidate : candidates) {
        if (!std::regex_search(text, m, *candidate.re)) continue;
        if (best && m.position(0) >= best_pos) continue;
        auto arg = clean_argument(m[1].str());
        if (!arg) continue;
        best = std::string(candidate.kind) + "[" + *arg + "]";
        best_pos = m.position(0);
    }
    return best;
}

}  // namespace

std::optional<std::string> as_thought(std::string_view raw_action) {
    static const std::regex thought(R"(^\s*(?:think|thought)\s*(?::|\[)\s*([\s\S]*?)\s*\]?\s*$)", std::regex::icase);
    const std::string text = strip_label(first_line(raw_action));
    std::smatch m;
    if (!std::regex_match(text, m, thought)) return std::nullopt;
    auto content = trim(m[1].str());
    if (content.empty()) return std::nullopt;
    return std::string(kThinkPrefix) + content;
}

bool is_canonical(std::string_view action, EnvKind env) {
    if (env == EnvKind::household) return household::HouseholdAction::parse(action).has_value();
    return qa::QAAction::parse(action).has_value();
}

std::optional<std::string> rule_formalize(std::string_view raw_action, EnvKind env) {
    if (trim(raw_action).empty()) return std::nullopt;
    return env == EnvKind::household ? household_rules(raw_action) : qa_rules(raw_action);
}

FormalizeResult Formalizer::formalize(std::string_view raw_action) const {
    FormalizeResult result;
    if (auto canonical = rule_formalize(raw_action, env_)) {
        result.action = std::move(*canonical);
        return result;
    }
    result.action = std::string(kInvalidAction);
    if (backend_ == nullptr || trim(raw_action).empty()) return result;

    CompletionRequest request;
    request.prompt = render_prompt(env_ == EnvKind::household ? "formalizer-household" : "formalizer-qa",
                                   {{"raw_action", first_line(raw_action)}});
    request.sampling = SamplingConfig::greedy();
    request.stop_markers = {"\n"};
    request.max_output = 400;
    result.used_backend = true;
    try {
        auto completion = backend_->complete(request);
        result.usage = completion.usage;
        if (auto canonical = rule_formalize(completion.text, env_)) result.action = std::move(*canonical);
    } catch (const EmptyCompletionError&) {
        // An empty reformatting is as unusable as an unparseable one.
    }
    return result;
}

}  // namespace autoplan
