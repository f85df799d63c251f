// SPDX-License-Identifier: Apache-2.0
#include "autoplan/replay.hpp"

#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "autoplan/episode_log.hpp"

namespace autoplan {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

std::string request_hash(const CompletionRequest& request) {
    std::string material = normalize_whitespace(request.prompt);
    material += "\n\x1f";
    material += to_string(request.sampling.mode);
    if (request.sampling.mode == SamplingMode::nucleus) {
        std::ostringstream extra;
        extra << ':' << request.sampling.top_p << ':' << request.sampling.seed;
        material += extra.str();
    }
    return sha256_hex(material);
}

ReplayCache::ReplayCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::exists(dir_)) return;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".json") continue;
        auto doc = nlohmann::json::parse(read_text_file(entry.path()));
        entries_[doc.at("hash").get<std::string>()] = doc.at("responses").get<std::vector<std::string>>();
    }
}

std::filesystem::path ReplayCache::file_for(const std::string& hash) const { return dir_ / (hash + ".json"); }

void ReplayCache::record(const std::string& hash, const std::string& prompt, const std::string& response) {
    std::lock_guard lock(mutex_);
    auto& responses = entries_[hash];
    responses.push_back(response);
    nlohmann::json doc{{"hash", hash},
                       {"prompt_chars", prompt.size()},
                       {"prompt_tail", prompt.substr(prompt.size() > 200 ? prompt.size() - 200 : 0)},
                       {"responses", responses}};
    write_text_file(file_for(hash), doc.dump(1));
}

std::optional<std::string> ReplayCache::lookup(const std::string& hash, std::size_t occurrence) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end() || it->second.empty()) return std::nullopt;
    return it->second[std::min(occurrence, it->second.size() - 1)];
}

std::size_t ReplayCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

RecordingBackend::RecordingBackend(Backend& inner, ReplayCache& cache)
    : Backend(inner.rates()), inner_(inner), cache_(cache) {}

std::string RecordingBackend::generate(const CompletionRequest& request) {
    std::string text;
    try {
        text = inner_.complete(request).text;
    } catch (const EmptyCompletionError&) {
        // Recorded so a replay fails the same way instead of missing.
        cache_.record(request_hash(request), request.prompt, "");
        throw;
    }
    cache_.record(request_hash(request), request.prompt, text);
    return text;
}

ReplayBackend::ReplayBackend(std::filesystem::path cache_dir, CostRates rates, std::string id)
    : Backend(rates), cache_(std::move(cache_dir)), id_(std::move(id)) {}

std::string ReplayBackend::generate(const CompletionRequest& request) {
    const std::string hash = request_hash(request);
    std::size_t occurrence = 0;
    {
        std::lock_guard lock(mutex_);
        occurrence = served_[hash]++;
    }
    auto response = cache_.lookup(hash, occurrence);
    if (!response) throw ReplayMissError(hash);
    return *response;
}

std::unique_ptr<Backend> record_replay_session(const std::filesystem::path& run_dir, CostRates rates) {
    auto dir = run_dir / "cache";
    if (!std::filesystem::is_directory(dir)) {
        throw BackendError("no replay cache under " + run_dir.string());
    }
    return std::make_unique<ReplayBackend>(dir, rates);
}

}  // namespace autoplan
