// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoplan/core.hpp"

namespace autoplan::household {

enum class TaskType { pick, light, clean, heat, cool, pick_two };

inline constexpr std::array kAllTaskTypes{TaskType::pick, TaskType::light, TaskType::clean,
                                          TaskType::heat, TaskType::cool,  TaskType::pick_two};

std::string_view to_string(TaskType type);
// Accepts "pick_two", "picktwo" and "pick-two" for the two-object task.
TaskType parse_task_type(std::string_view text);

// Name plus optional index, e.g. "cabinet 2". A missing index is kept so the
// game can answer with the missing-index feedback.
struct Ref {
    std::string name;
    std::optional<int> index;

    std::string str() const;
    bool operator==(const Ref&) const = default;
};

enum class Verb { go, take, put, open, close, heat, cool, clean, use, think };

struct HouseholdAction {
    Verb verb = Verb::think;
    std::optional<Ref> object;
    std::optional<Ref> receptacle;
    std::string thought;  // think only

    // Canonical surface form, e.g. "put mug 1 in/on desk 1".
    std::string str() const;

    // Strict parse of the canonical grammar; anything else is nullopt.
    static std::optional<HouseholdAction> parse(std::string_view canonical);

    bool operator==(const HouseholdAction&) const = default;
};

struct Receptacle {
    std::string kind;
    int index = 1;
    bool openable = false;
    bool open = true;

    std::string label() const { return kind + " " + std::to_string(index); }
    bool accessible() const { return !openable || open; }
};

struct Object {
    std::string kind;
    int index = 1;
    std::optional<std::size_t> location;  // receptacle slot; nullopt while held
    bool hot = false;
    bool cold = false;
    bool clean = false;
    bool takeable = true;

    std::string label() const { return kind + " " + std::to_string(index); }
};

struct WorldState {
    std::vector<Receptacle> receptacles;
    std::vector<Object> objects;
    std::optional<std::size_t> agent_location;  // nullopt: middle of the room
    std::optional<std::size_t> held;            // object slot in the inventory
    std::vector<std::size_t> lamp_examined;      // object slots examined under a lit desklamp

    std::optional<std::size_t> find_receptacle(std::string_view kind, int index) const;
    std::optional<std::size_t> find_object(std::string_view kind, int index) const;
    bool has_receptacle_kind(std::string_view kind) const;

    // Stable hash of the full state; equal states hash equal.
    std::uint64_t fingerprint() const;
};

struct Objective {
    TaskType type = TaskType::pick;
    std::string object_kind;
    std::string receptacle_kind;  // empty for Light
    int template_variant = 0;     // which of the two objective phrasings

    std::string text() const;
};

struct GeneratedWorld {
    WorldState state;
    Objective objective;
};

// Seeded world generation. The result always admits the oracle sequence; the
// generator redraws internally until it does.
GeneratedWorld generate_world(TaskType type, std::uint64_t env_seed);

// Checks the preconditions the oracle relies on.
bool is_solvable(const GeneratedWorld& world);

std::string instance_id(TaskType type, Split split, std::uint64_t env_seed);

// Generic rules of the game followed by the instance objective.
std::string describe_task(std::string_view id, const Objective& objective);

// Agent position plus every receptacle; contents stay hidden.
std::string initial_observation(const WorldState& state);

struct StepOutcome {
    std::string observation;
    bool valid = true;
};

// Applies one action. Invalid actions return augmented feedback and leave the
// state untouched. Think actions are acknowledged and change nothing.
StepOutcome apply_action(WorldState& state, const HouseholdAction& action);

bool goal_check(const WorldState& state, const Objective& objective);

// Concrete instantiation of the known-correct action sequence for the
// objective's task type against this world.
std::vector<HouseholdAction> oracle_sequence(const WorldState& state, const Objective& objective);

// Feedback strings come from assets/household_feedback.txt. `vars` fills
// {obj}, {recep}, {name}, {kind} placeholders.
std::string feedback(std::string_view key, const std::map<std::string, std::string, std::less<>>& vars = {});

}  // namespace autoplan::household
