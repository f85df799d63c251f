// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoplan/config.hpp"
#include "autoplan/optimizer.hpp"

namespace autoplan {

// "# autoplan plan v<iteration> family=<family>" followed by the plan text.
std::string render_plan_file(const Plan& plan);
// Throws std::invalid_argument on a malformed header or an inconsistent plan.
Plan parse_plan_file(std::string_view text);
Plan read_plan_file(const std::filesystem::path& path);

// Layout of one training run:
//   plan_v<k>.txt          plan after k iterations (plan_v0 is the empty plan)
//   iter_<i>/episodes.jsonl, iter_<i>/reflections.jsonl, iter_<i>/batch.json
//   usage.jsonl            one usage record per iteration
//   manifest.json          configuration and outcome digest, no paths or times
//   environment/           instance catalog or QA corpus the run used
//   cache/                 every completion, for replay
class RunStore {
public:
    explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path plan_path(std::size_t k) const;
    std::filesystem::path iteration_dir(std::size_t i) const;
    std::filesystem::path cache_dir() const { return dir_ / "cache"; }
    std::filesystem::path environment_dir() const { return dir_ / "environment"; }
    std::filesystem::path manifest_path() const { return dir_ / "manifest.json"; }

    void write_plan(std::size_t k, const Plan& plan) const;
    Plan read_plan(std::size_t k) const;

    void write_iteration(const IterationRecord& record) const;
    std::vector<Episode> read_episodes(std::size_t i) const;
    std::vector<Reflection> read_reflections(std::size_t i) const;
    nlohmann::json read_batch(std::size_t i) const;

    // Copies the environment data so the run can be replayed without the
    // original config.
    void write_environment(const AppConfig& config, const EnvironmentSuite& suite) const;
    std::unique_ptr<EnvironmentSuite> load_environment(EnvKind env) const;

    void write_manifest(const nlohmann::json& manifest) const;
    nlohmann::json read_manifest() const;

private:
    std::filesystem::path dir_;
};

nlohmann::json make_manifest(const AppConfig& config, const OptimizeResult& result, const std::string& backend_id);

// RunConfig fields recorded in a manifest.
RunConfig run_config_from_manifest(const nlohmann::json& manifest);

struct ReplayReport {
    bool identical = true;
    std::string divergence;  // "iter_<i>: <site>" of the first divergence, empty when identical
};

// Re-runs every recorded iteration against the run's cache, feeding each
// recorded plan back in, and compares episodes, reflections and the next
// plan with what was stored.
ReplayReport verify_replay(const std::filesystem::path& run_dir);

}  // namespace autoplan
