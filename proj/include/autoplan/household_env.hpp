// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>

#include "autoplan/env.hpp"
#include "autoplan/household.hpp"

namespace autoplan::household {

struct CatalogOptions {
    std::size_t train_per_type = 24;
    std::size_t test_per_type = 10;
    std::uint64_t test_seed_offset = 100000;  // test seeds never collide with train seeds
};

class HouseholdSuite;

class HouseholdEnvironment final : public Environment {
public:
    explicit HouseholdEnvironment(const HouseholdSuite& suite) : suite_(suite) {}

    std::string reset(const TaskInstance& instance) override;
    // kInvalidAction and anything outside the grammar get the generic
    // invalid feedback. The episode closes once the goal holds.
    Transition step(std::string_view canonical_action) override;
    bool goal_reached() const override;

    const WorldState& state() const;
    const Objective& objective() const;

private:
    const HouseholdSuite& suite_;
    std::optional<GeneratedWorld> world_;
};

class HouseholdSuite final : public EnvironmentSuite {
public:
    explicit HouseholdSuite(CatalogOptions options = {});

    // Instances from a catalog file written by export_catalog. Each record is
    // regenerated from its seed; a description that no longer matches the
    // generator is rejected.
    static std::unique_ptr<HouseholdSuite> from_catalog(const std::filesystem::path& path);
    void export_catalog(const std::filesystem::path& path) const;

    EnvKind kind() const override { return EnvKind::household; }
    std::vector<TaskInstance> instances(Split split, std::string_view task_family = {}) const override;
    std::vector<std::string> task_families() const override;
    std::unique_ptr<Environment> make_environment() const override;
    const TaskInstance& find(std::string_view id) const override;

    GeneratedWorld world(const TaskInstance& instance) const;

private:
    struct EmptyTag {};
    explicit HouseholdSuite(EmptyTag) {}
    void add(TaskInstance instance);

    std::vector<TaskInstance> catalog_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

// Catalog entry for (type, split, seed), with the rendered description.
TaskInstance make_instance(TaskType type, Split split, std::uint64_t env_seed);

}  // namespace autoplan::household
