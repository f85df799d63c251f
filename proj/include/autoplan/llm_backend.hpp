// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autoplan/core.hpp"

namespace autoplan {

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The remote endpoint could not be reached or kept failing after retries.
class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

// The model answered, but with nothing usable once stop markers were applied.
class EmptyCompletionError : public BackendError {
public:
    using BackendError::BackendError;
};

class ReplayMissError : public BackendError {
public:
    explicit ReplayMissError(std::string request_hash)
        : BackendError("replay miss: no recorded response for request " + request_hash),
          hash_(std::move(request_hash)) {}
    const std::string& request_hash() const { return hash_; }

private:
    std::string hash_;
};

struct CompletionRequest {
    std::string prompt;
    SamplingConfig sampling;
    std::vector<std::string> stop_markers;
    std::size_t max_output = 4000;  // characters
};

struct Completion {
    std::string text;
    UsageRecord usage;
};

// Currency per character of prompt and of completion.
struct CostRates {
    double per_input_char = 0.0;
    double per_output_char = 0.0;
};

UsageRecord make_usage(std::string backend_id, std::size_t input_chars, std::size_t output_chars,
                       const CostRates& rates);

// Cut at the earliest occurrence of any stop marker.
std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop_markers);

// Thread-safe running total across every complete() call of one backend.
class UsageLedger {
public:
    void add(const UsageRecord& record);
    UsageRecord total() const;

private:
    mutable std::mutex mutex_;
    UsageRecord total_;
};

// Uniform completion interface. complete() owns the shared contract (prompt
// validation, stop-marker truncation, empty detection, usage accounting);
// subclasses only produce raw text. Implementations must tolerate concurrent
// complete() calls.
class Backend {
public:
    explicit Backend(CostRates rates = {}) : rates_(rates) {}
    virtual ~Backend() = default;
    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    Completion complete(const CompletionRequest& request);

    virtual std::string id() const = 0;
    UsageRecord usage() const { return ledger_.total(); }
    const CostRates& rates() const { return rates_; }

protected:
    virtual std::string generate(const CompletionRequest& request) = 0;

private:
    CostRates rates_;
    UsageLedger ledger_;
};

}  // namespace autoplan
