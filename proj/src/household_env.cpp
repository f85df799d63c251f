// SPDX-License-Identifier: Apache-2.0
#include "autoplan/household_env.hpp"

#include <nlohmann/json.hpp>

#include "autoplan/episode_log.hpp"

namespace autoplan::household {

TaskInstance make_instance(TaskType type, Split split, std::uint64_t env_seed) {
    TaskInstance instance;
    instance.id = instance_id(type, split, env_seed);
    instance.task_family = std::string(to_string(type));
    instance.env_seed = env_seed;
    instance.split = split;
    instance.description = describe_task(instance.id, generate_world(type, env_seed).objective);
    return instance;
}

std::string HouseholdEnvironment::reset(const TaskInstance& instance) {
    const auto& known = suite_.find(instance.id);
    world_ = suite_.world(known);
    return initial_observation(world_->state);
}

Transition HouseholdEnvironment::step(std::string_view canonical_action) {
    if (!world_) throw std::logic_error("step() before reset()");
    Transition transition;
    auto action = canonical_action == kInvalidAction ? std::nullopt : HouseholdAction::parse(canonical_action);
    if (!action) {
        transition.observation = feedback("invalid_action");
        transition.valid = false;
        return transition;
    }
    auto outcome = apply_action(world_->state, *action);
    transition.observation = std::move(outcome.observation);
    transition.valid = outcome.valid;
    transition.done = goal_check(world_->state, world_->objective);
    transition.reward = transition.done ? 1 : 0;
    return transition;
}

bool HouseholdEnvironment::goal_reached() const { return world_ && goal_check(world_->state, world_->objective); }

const WorldState& HouseholdEnvironment::state() const {
    if (!world_) throw std::logic_error("state() before reset()");
    return world_->state;
}

const Objective& HouseholdEnvironment::objective() const {
    if (!world_) throw std::logic_error("objective() before reset()");
    return world_->objective;
}

HouseholdSuite::HouseholdSuite(CatalogOptions options) {
    for (auto type : kAllTaskTypes) {
        for (std::size_t k = 0; k < options.train_per_type; ++k) add(make_instance(type, Split::train, k));
        for (std::size_t k = 0; k < options.test_per_type; ++k) {
            add(make_instance(type, Split::test, options.test_seed_offset + k));
        }
    }
}

void HouseholdSuite::add(TaskInstance instance) {
    if (by_id_.count(instance.id) != 0) throw std::invalid_argument("duplicate instance id " + instance.id);
    by_id_.emplace(instance.id, catalog_.size());
    catalog_.push_back(std::move(instance));
}

std::unique_ptr<HouseholdSuite> HouseholdSuite::from_catalog(const std::filesystem::path& path) {
    std::unique_ptr<HouseholdSuite> suite(new HouseholdSuite(EmptyTag{}));
    for (const auto& line : read_lines(path)) {
        auto record = nlohmann::json::parse(line).get<TaskInstance>();
        const auto expected = make_instance(parse_task_type(record.task_family), record.split, record.env_seed);
        if (expected != record) {
            throw std::invalid_argument("catalog entry " + record.id + " does not match the generator");
        }
        suite->add(std::move(record));
    }
    return suite;
}

void HouseholdSuite::export_catalog(const std::filesystem::path& path) const {
    std::vector<std::string> lines;
    lines.reserve(catalog_.size());
    for (const auto& instance : catalog_) lines.push_back(nlohmann::json(instance).dump());
    write_lines(path, lines);
}

std::vector<TaskInstance> HouseholdSuite::instances(Split split, std::string_view task_family) const {
    std::vector<TaskInstance> out;
    for (const auto& instance : catalog_) {
        if (instance.split == split && (task_family.empty() || instance.task_family == task_family)) {
            out.push_back(instance);
        }
    }
    return out;
}

std::vector<std::string> HouseholdSuite::task_families() const {
    std::vector<std::string> out;
    for (auto type : kAllTaskTypes) out.emplace_back(to_string(type));
    return out;
}

std::unique_ptr<Environment> HouseholdSuite::make_environment() const {
    return std::make_unique<HouseholdEnvironment>(*this);
}

const TaskInstance& HouseholdSuite::find(std::string_view id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw UnknownInstanceError(std::string(id));
    return catalog_[it->second];
}

GeneratedWorld HouseholdSuite::world(const TaskInstance& instance) const {
    return generate_world(parse_task_type(instance.task_family), instance.env_seed);
}

}  // namespace autoplan::household
