// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "autoplan/llm_backend.hpp"

namespace autoplan {

// SHA-256 (hex) of the whitespace-normalized prompt plus the sampling
// parameters that influence the answer. Greedy requests ignore the seed.
std::string request_hash(const CompletionRequest& request);

std::string sha256_hex(std::string_view data);

// Content-addressed store of recorded completions: <dir>/<hash>.json holds
// every response observed for that request, in order.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path dir);

    void record(const std::string& hash, const std::string& prompt, const std::string& response);

    // The response for the `occurrence`-th identical request. Past the end of
    // the recorded list the last response is reused.
    std::optional<std::string> lookup(const std::string& hash, std::size_t occurrence) const;

    std::size_t size() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path file_for(const std::string& hash) const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> entries_;
};

// Forwards to `inner` and appends each completion to the cache.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(Backend& inner, ReplayCache& cache);
    std::string id() const override { return inner_.id(); }

protected:
    std::string generate(const CompletionRequest& request) override;

private:
    Backend& inner_;
    ReplayCache& cache_;
};

// Answers only from a recorded cache; an unknown request raises
// ReplayMissError carrying its hash.
class ReplayBackend final : public Backend {
public:
    // `id` lets a verification replay report the recorded backend's id.
    explicit ReplayBackend(std::filesystem::path cache_dir, CostRates rates = {}, std::string id = "replay");
    std::string id() const override { return id_; }

protected:
    std::string generate(const CompletionRequest& request) override;

private:
    ReplayCache cache_;
    std::string id_;
    std::mutex mutex_;
    std::map<std::string, std::size_t> served_;
};

// Opens the cache recorded under a run directory.
std::unique_ptr<Backend> record_replay_session(const std::filesystem::path& run_dir, CostRates rates = {});

}  // namespace autoplan
