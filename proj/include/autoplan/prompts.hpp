// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autoplan {

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using PromptBindings = std::map<std::string, std::string, std::less<>>;

// Names accepted by render_prompt: thought, summary, flaw, revision, update,
// formalizer-household, formalizer-qa.
const std::vector<std::string>& prompt_template_names();

// Raw template text as stored in assets/prompts/<name>.txt.
const std::string& prompt_template(std::string_view name);

// Substitutes every `{{key}}` placeholder. Throws PromptError for an unknown
// template or a placeholder without a binding; unused bindings are ignored.
std::string render_prompt(std::string_view name, const PromptBindings& bindings = {});

}  // namespace autoplan
