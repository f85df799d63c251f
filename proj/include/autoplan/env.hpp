// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autoplan/core.hpp"

namespace autoplan {

class UnknownInstanceError : public std::runtime_error {
public:
    explicit UnknownInstanceError(const std::string& id) : std::runtime_error("unknown task instance '" + id + "'") {}
};

struct Transition {
    std::string observation;
    bool done = false;   // the environment closed the episode
    int reward = 0;
    bool valid = true;   // false when the observation is error feedback
};

// One episode's worth of environment state. Strictly sequential.
class Environment {
public:
    virtual ~Environment() = default;
    virtual std::string reset(const TaskInstance& instance) = 0;
    virtual Transition step(std::string_view canonical_action) = 0;
    virtual bool goal_reached() const = 0;
};

// Instance catalog plus a factory for independent per-episode environments.
// Implementations are immutable after construction and safe to share.
class EnvironmentSuite {
public:
    virtual ~EnvironmentSuite() = default;
    virtual EnvKind kind() const = 0;
    // Empty `task_family` selects every family.
    virtual std::vector<TaskInstance> instances(Split split, std::string_view task_family = {}) const = 0;
    virtual std::vector<std::string> task_families() const = 0;
    virtual std::unique_ptr<Environment> make_environment() const = 0;
    virtual const TaskInstance& find(std::string_view id) const = 0;
};

}  // namespace autoplan
