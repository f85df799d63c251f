// SPDX-License-Identifier: Apache-2.0
#include "autoplan/prompts.hpp"

#include <algorithm>

#include "autoplan/assets.hpp"

namespace autoplan {

const std::vector<std::string>& prompt_template_names() {
    static const std::vector<std::string> names = {
        "thought", "summary", "flaw", "revision", "update", "formalizer-household", "formalizer-qa"};
    return names;
}

const std::string& prompt_template(std::string_view name) {
    const auto& names = prompt_template_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw PromptError("unknown prompt template '" + std::string(name) + "'");
    }
    return assets::get("assets/prompts/" + std::string(name) + ".txt");
}

std::string render_prompt(std::string_view name, const PromptBindings& bindings) {
    const std::string& text = prompt_template(name);
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos);
            break;
        }
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(text, pos);
            break;
        }
        out.append(text, pos, open - pos);
        const std::string_view key(text.data() + open + 2, close - open - 2);
        auto it = bindings.find(key);
        if (it == bindings.end()) {
            throw PromptError("template '" + std::string(name) + "' needs a binding for '" +
                              std::string(key) + "'");
        }
        out += it->second;
        pos = close + 2;
    }
    return out;
}

}  // namespace autoplan
