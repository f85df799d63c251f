// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "autoplan/core.hpp"
#include "autoplan/env.hpp"
#include "autoplan/household_env.hpp"
#include "autoplan/llm_backend.hpp"
#include "autoplan/remote_backend.hpp"

namespace autoplan {

// Invalid or missing configuration value. `field` is "section.key".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct AppConfig {
    RunConfig run;
    household::CatalogOptions catalog;
    std::string catalog_path;  // empty: generate the default catalog
    std::string qa_corpus;     // empty: bundled corpus
    std::string qa_questions;  // empty: bundled questions
    RemoteConfig remote;
    CostRates rates{0.0000075, 0.000015};
    std::string run_dir;
};

// INI text with [run], [optimizer], [sampling], [backend], [prompt],
// [household] and [qa] sections. optimizer.batch_size and
// optimizer.iterations are required; everything else has a default.
AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::filesystem::path& path);

// A complete config file carrying every default, accepted by parse_config.
std::string default_config_text();

std::unique_ptr<EnvironmentSuite> make_suite(const AppConfig& config);

// "remote", "scripted:<oracle|staged|toaster|thinker>", "scripted:<rules.json>"
// or "replay:<run dir or cache dir>". Throws ConfigError for anything else.
std::unique_ptr<Backend> make_backend(const std::string& selector, const AppConfig& config,
                                      const EnvironmentSuite& suite);

// Backend selector with any path component removed, safe to persist.
std::string backend_kind(const std::string& selector);

}  // namespace autoplan
