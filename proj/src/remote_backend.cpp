// SPDX-License-Identifier: Apache-2.0
#include "autoplan/remote_backend.hpp"

#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace autoplan {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint needs a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, ""};
    std::string path = url.substr(path_begin);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_begin), path};
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config, CostRates rates)
    : Backend(rates), config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string RemoteBackend::request_body(const CompletionRequest& request) const {
    nlohmann::json body{{"model", config_.model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                        {"max_tokens", request.max_output / 4 + 1}};
    if (request.sampling.mode == SamplingMode::greedy) {
        body["temperature"] = 0;
    } else {
        body["temperature"] = 1;
        body["top_p"] = request.sampling.top_p;
        body["seed"] = request.sampling.seed;
    }
    if (!request.stop_markers.empty()) {
        // The wire protocol accepts at most four stop sequences; the rest are
        // applied locally by complete().
        auto stops = request.stop_markers;
        if (stops.size() > 4) stops.resize(4);
        body["stop"] = stops;
    }
    return body.dump();
}

std::string RemoteBackend::generate(const CompletionRequest& request) {
    const Endpoint endpoint = split_endpoint(config_.endpoint);
    const std::string body = request_body(request);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::mt19937_64 jitter_rng(std::random_device{}());
    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const auto base = config_.backoff_base * (1 << (attempt - 1));
            std::uniform_int_distribution<long long> jitter(0, base.count() / 2);
            std::this_thread::sleep_for(base + std::chrono::milliseconds(jitter(jitter_rng)));
        }
        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        auto response = client.Post(endpoint.path + "/chat/completions", headers, body, "application/json");
        if (!response) {
            last_error = "transport error: " + httplib::to_string(response.error());
            continue;
        }
        if (response->status == 429 || response->status >= 500) {
            last_error = "HTTP " + std::to_string(response->status);
            continue;
        }
        if (response->status != 200) {
            throw TransportError("remote backend rejected the request: HTTP " +
                                 std::to_string(response->status) + " " + response->body);
        }
        auto doc = nlohmann::json::parse(response->body, nullptr, false);
        if (doc.is_discarded()) throw TransportError("remote backend sent malformed JSON");
        const auto& choices = doc.value("choices", nlohmann::json::array());
        if (choices.empty()) return {};
        const auto& content = choices.at(0).value("message", nlohmann::json::object()).value("content", nlohmann::json());
        return content.is_string() ? content.get<std::string>() : std::string();
    }
    throw TransportError("remote backend unreachable after " + std::to_string(config_.max_attempts) +
                         " attempts (" + last_error + ")");
}

}  // namespace autoplan
