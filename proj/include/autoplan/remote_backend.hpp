// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>

#include "autoplan/llm_backend.hpp"

namespace autoplan {

struct RemoteConfig {
    // Base URL; requests go to <endpoint>/chat/completions.
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4-0314";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::seconds timeout{120};
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{1000};
};

// Chat-completion client. Sampling is delegated to the API: greedy maps to
// temperature 0, nucleus to temperature 1 with the configured top_p.
// Connection failures, 429 and 5xx are retried with exponential backoff and
// jitter; the last failure surfaces as TransportError.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config, CostRates rates = {});
    std::string id() const override { return "remote:" + config_.model; }

    // Request body sent for `request`, exposed for wire-format tests.
    std::string request_body(const CompletionRequest& request) const;

protected:
    std::string generate(const CompletionRequest& request) override;

private:
    RemoteConfig config_;
    std::string api_key_;
};

}  // namespace autoplan
