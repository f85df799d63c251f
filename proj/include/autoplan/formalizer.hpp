// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "autoplan/llm_backend.hpp"

namespace autoplan {

// "think: ..." when the raw text is a thought ("Think: x", "think[x]", ...).
// Thoughts never reach the formalizer or the environment.
std::optional<std::string> as_thought(std::string_view raw_action);

// True when `action` is already in the environment's canonical grammar.
bool is_canonical(std::string_view action, EnvKind env);

// Deterministic pattern parser. nullopt when no verb pattern applies.
std::optional<std::string> rule_formalize(std::string_view raw_action, EnvKind env);

struct FormalizeResult {
    std::string action;  // canonical, or kInvalidAction
    bool used_backend = false;
    UsageRecord usage;
};

// Rule parser first; one formalizer-prompt completion when it fails; the
// invalid-action marker when the completion does not parse either. Backend
// errors propagate. Stateless.
class Formalizer {
public:
    Formalizer(EnvKind env, Backend* backend) : env_(env), backend_(backend) {}

    FormalizeResult formalize(std::string_view raw_action) const;

private:
    EnvKind env_;
    Backend* backend_;
};

}  // namespace autoplan
