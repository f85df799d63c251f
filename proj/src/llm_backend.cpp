// SPDX-License-Identifier: Apache-2.0
#include "autoplan/llm_backend.hpp"

namespace autoplan {

UsageRecord make_usage(std::string backend_id, std::size_t input_chars, std::size_t output_chars,
                       const CostRates& rates) {
    UsageRecord record;
    record.backend_id = std::move(backend_id);
    record.calls = 1;
    record.input_chars = input_chars;
    record.output_chars = output_chars;
    record.estimated_cost = static_cast<double>(input_chars) * rates.per_input_char +
                            static_cast<double>(output_chars) * rates.per_output_char;
    return record;
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop_markers) {
    std::size_t cut = text.size();
    for (const auto& marker : stop_markers) {
        if (marker.empty()) continue;
        cut = std::min(cut, text.find(marker));
    }
    text.resize(cut);
    return text;
}

void UsageLedger::add(const UsageRecord& record) {
    std::lock_guard lock(mutex_);
    total_ += record;
}

UsageRecord UsageLedger::total() const {
    std::lock_guard lock(mutex_);
    return total_;
}

Completion Backend::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw BackendError("completion request has an empty prompt");
    std::string text = truncate_at_stop(generate(request), request.stop_markers);
    if (text.size() > request.max_output) text.resize(request.max_output);
    if (trim(text).empty()) {
        throw EmptyCompletionError("backend " + id() + " returned an empty completion");
    }
    Completion completion{std::move(text), {}};
    completion.usage = make_usage(id(), request.prompt.size(), completion.text.size(), rates_);
    ledger_.add(completion.usage);
    return completion;
}

}  // namespace autoplan
