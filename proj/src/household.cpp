// SPDX-License-Identifier: Apache-2.0
#include "autoplan/household.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "autoplan/assets.hpp"

namespace autoplan::household {

namespace {

using Vars = std::map<std::string, std::string, std::less<>>;

struct ReceptacleSpec {
    std::string_view kind;
    bool openable;
    int max_count;
};

constexpr std::array kReceptacleCatalog{
    ReceptacleSpec{"armchair", false, 1},   ReceptacleSpec{"bed", false, 1},
    ReceptacleSpec{"cabinet", true, 4},     ReceptacleSpec{"coffeemachine", false, 1},
    ReceptacleSpec{"countertop", false, 3}, ReceptacleSpec{"desk", false, 1},
    ReceptacleSpec{"diningtable", false, 1}, ReceptacleSpec{"drawer", true, 4},
    ReceptacleSpec{"dresser", false, 1},    ReceptacleSpec{"fridge", true, 1},
    ReceptacleSpec{"garbagecan", false, 1}, ReceptacleSpec{"microwave", true, 1},
    ReceptacleSpec{"safe", true, 1},        ReceptacleSpec{"shelf", false, 3},
    ReceptacleSpec{"sidetable", false, 2},  ReceptacleSpec{"sinkbasin", false, 1},
    ReceptacleSpec{"sofa", false, 1},       ReceptacleSpec{"stoveburner", false, 2},
    ReceptacleSpec{"toaster", false, 1},
};

const ReceptacleSpec& receptacle_spec(std::string_view kind) {
    for (const auto& spec : kReceptacleCatalog) {
        if (spec.kind == kind) return spec;
    }
    throw std::logic_error("receptacle kind missing from catalog: " + std::string(kind));
}

using Names = std::vector<std::string_view>;

const Names kHeatObjects{"apple", "bread", "cup", "egg", "mug", "plate", "potato", "tomato"};
const Names kCoolObjects{"apple", "bread", "cup", "egg", "lettuce", "mug", "pan", "plate", "potato", "tomato"};
const Names kCleanObjects{"apple",  "bowl", "butterknife", "cup",   "fork",    "knife",  "ladle", "lettuce",
                          "mug",    "pan",  "plate",       "pot",   "spatula", "spoon",  "tomato"};
const Names kPickObjects{"book",          "cellphone", "creditcard", "keychain", "pen",  "pencil",    "pillow",
                         "remotecontrol", "vase",      "watch",      "cd",       "statue", "soapbar", "spraybottle"};
const Names kLightObjects{"alarmclock", "book", "bowl", "cd", "cellphone", "creditcard", "keychain", "pen",
                          "pencil", "statue"};

const Names kKitchenTargets{"countertop", "diningtable", "sidetable", "cabinet", "shelf", "drawer"};
const Names kPickTargets{"armchair", "bed",    "cabinet",     "countertop", "desk", "diningtable",
                         "drawer",   "dresser", "safe",       "shelf",      "sidetable", "sofa"};

const Names& object_pool(TaskType type) {
    switch (type) {
        case TaskType::heat: return kHeatObjects;
        case TaskType::cool: return kCoolObjects;
        case TaskType::clean: return kCleanObjects;
        case TaskType::light: return kLightObjects;
        case TaskType::pick:
        case TaskType::pick_two: return kPickObjects;
    }
    return kPickObjects;
}

const Names& target_pool(TaskType type) {
    switch (type) {
        case TaskType::heat:
        case TaskType::cool:
        case TaskType::clean: return kKitchenTargets;
        default: return kPickTargets;
    }
}

// Appliance kind a transform verb requires.
std::string_view appliance_for(Verb verb) {
    switch (verb) {
        case Verb::heat: return "microwave";
        case Verb::cool: return "fridge";
        case Verb::clean: return "sinkbasin";
        default: return {};
    }
}

std::string_view appliance_for(TaskType type) {
    switch (type) {
        case TaskType::heat: return "microwave";
        case TaskType::cool: return "fridge";
        case TaskType::clean: return "sinkbasin";
        default: return {};
    }
}

// Portable draws: the standard distributions are implementation-defined, the
// engine is not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }
    template <typename T>
    const T& pick(const std::vector<T>& items) { return items[below(items.size())]; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(TaskType type, std::uint64_t seed) {
    std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(type) + 1;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string with_article_list(const std::vector<std::string>& labels) {
    if (labels.empty()) return "nothing";
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) out += ", ";
        if (i > 0 && i + 1 == labels.size()) out += "and ";
        out += "a " + labels[i];
    }
    return out;
}

std::vector<std::string> contents(const WorldState& state, std::size_t slot) {
    std::vector<std::string> labels;
    for (const auto& object : state.objects) {
        if (object.location == slot) labels.push_back(object.label());
    }
    return labels;
}

std::string describe_receptacle(const WorldState& state, std::size_t slot) {
    const auto& receptacle = state.receptacles[slot];
    if (!receptacle.accessible()) return "The " + receptacle.label() + " is closed.";
    return "On the " + receptacle.label() + ", you see " + with_article_list(contents(state, slot)) + ".";
}

const Vars& feedback_table() {
    static const Vars table = [] {
        Vars entries;
        std::istringstream in(assets::get("assets/household_feedback.txt"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line.front() == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            entries.emplace(line.substr(0, tab), line.substr(tab + 1));
        }
        return entries;
    }();
    return table;
}

StepOutcome fail(std::string_view key, const Vars& vars = {}) { return {feedback(key, vars), false}; }

std::optional<StepOutcome> require_index(const std::optional<Ref>& ref) {
    if (!ref) return fail("invalid_action");
    if (!ref->index) return fail("missing_index", {{"name", ref->name}});
    return std::nullopt;
}

// Held object matching `ref`, if any.
std::optional<std::size_t> held_match(const WorldState& state, const Ref& ref) {
    if (!state.held) return std::nullopt;
    const auto& object = state.objects[*state.held];
    if (object.kind == ref.name && object.index == ref.index) return state.held;
    return std::nullopt;
}

StepOutcome do_go(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& ref = *action.receptacle;
    auto slot = state.find_receptacle(ref.name, *ref.index);
    if (!slot) return fail("invalid_receptacle", {{"recep", ref.str()}});
    state.agent_location = slot;
    return {"You arrive at " + ref.str() + ". " + describe_receptacle(state, *slot), true};
}

StepOutcome do_take(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.object)) return *err;
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& obj = *action.object;
    const Ref& rec = *action.receptacle;
    auto slot = state.find_receptacle(rec.name, *rec.index);
    if (!slot) return fail("invalid_receptacle", {{"recep", rec.str()}});
    if (state.agent_location != slot) return fail("wrong_location", {{"recep", rec.str()}});
    if (!state.receptacles[*slot].accessible()) return fail("closed_receptacle", {{"recep", rec.str()}});
    if (state.held) return fail("inventory_limit");
    auto object = state.find_object(obj.name, *obj.index);
    if (!object || state.objects[*object].location != slot) {
        return fail("object_not_here", {{"obj", obj.str()}, {"recep", rec.str()}});
    }
    if (!state.objects[*object].takeable) return fail("not_takeable", {{"obj", obj.str()}});
    state.objects[*object].location.reset();
    state.held = object;
    return {"You pick up the " + obj.str() + " from the " + rec.str() + ".", true};
}

StepOutcome do_put(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.object)) return *err;
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& obj = *action.object;
    const Ref& rec = *action.receptacle;
    auto held = held_match(state, obj);
    if (!held) return fail("not_in_inventory", {{"obj", obj.str()}});
    auto slot = state.find_receptacle(rec.name, *rec.index);
    if (!slot) return fail("invalid_receptacle", {{"recep", rec.str()}});
    if (state.agent_location != slot) return fail("wrong_location", {{"recep", rec.str()}});
    if (!state.receptacles[*slot].accessible()) return fail("closed_receptacle", {{"recep", rec.str()}});
    state.objects[*held].location = slot;
    state.held.reset();
    return {"You put the " + obj.str() + " in/on the " + rec.str() + ".", true};
}

StepOutcome do_open_close(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& rec = *action.receptacle;
    auto slot = state.find_receptacle(rec.name, *rec.index);
    if (!slot) return fail("invalid_receptacle", {{"recep", rec.str()}});
    if (state.agent_location != slot) return fail("wrong_location", {{"recep", rec.str()}});
    auto& receptacle = state.receptacles[*slot];
    if (!receptacle.openable) return fail("not_openable", {{"recep", rec.str()}});
    const bool opening = action.verb == Verb::open;
    if (receptacle.open == opening) return fail(opening ? "already_open" : "already_closed", {{"recep", rec.str()}});
    receptacle.open = opening;
    if (!opening) return {"You close the " + rec.str() + ".", true};
    return {"You open the " + rec.str() + ". The " + rec.str() + " is open. In it, you see " +
                with_article_list(contents(state, *slot)) + ".",
            true};
}

StepOutcome do_transform(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.object)) return *err;
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& obj = *action.object;
    const Ref& rec = *action.receptacle;
    const std::string_view appliance = appliance_for(action.verb);
    if (rec.name != appliance) {
        const char* key = action.verb == Verb::heat ? "invalid_heating"
                          : action.verb == Verb::cool ? "invalid_cooling"
                                                      : "invalid_cleaning";
        return fail(key, {{"kind", rec.name}});
    }
    auto slot = state.find_receptacle(rec.name, *rec.index);
    if (!slot) return fail("invalid_receptacle", {{"recep", rec.str()}});
    auto held = held_match(state, obj);
    if (!held) return fail("not_in_inventory", {{"obj", obj.str()}});
    if (state.agent_location != slot) return fail("wrong_location", {{"recep", rec.str()}});
    auto& object = state.objects[*held];
    std::string verb_past;
    switch (action.verb) {
        case Verb::heat:
            object.hot = true;
            object.cold = false;
            verb_past = "heat";
            break;
        case Verb::cool:
            object.cold = true;
            object.hot = false;
            verb_past = "cool";
            break;
        default:
            object.clean = true;
            verb_past = "clean";
            break;
    }
    return {"You " + verb_past + " the " + obj.str() + " using the " + rec.str() + ".", true};
}

StepOutcome do_use(WorldState& state, const HouseholdAction& action) {
    if (auto err = require_index(action.receptacle)) return *err;
    const Ref& ref = *action.receptacle;
    if (ref.name != "desklamp") {
        if (state.find_receptacle(ref.name, *ref.index)) return fail("not_usable", {{"name", ref.str()}});
        return fail("invalid_receptacle", {{"recep", ref.str()}});
    }
    auto lamp = state.find_object(ref.name, *ref.index);
    if (!lamp) return fail("invalid_receptacle", {{"recep", ref.str()}});
    const auto lamp_location = state.objects[*lamp].location;
    if (!lamp_location) return fail("not_usable", {{"name", ref.str()}});
    if (state.agent_location != lamp_location) {
        return fail("wrong_location", {{"recep", state.receptacles[*lamp_location].label()}});
    }
    if (state.held) state.lamp_examined.push_back(*state.held);
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
        if (i != *lamp && state.objects[i].location == lamp_location) state.lamp_examined.push_back(i);
    }
    return {"You turn on the " + ref.str() + ".", true};
}

std::optional<Ref> make_ref(const std::string& name, const std::string& index) {
    Ref ref{name, std::nullopt};
    if (!index.empty()) {
        const int value = std::stoi(index);
        if (value <= 0) return std::nullopt;
        ref.index = value;
    }
    return ref;
}

}  // namespace

std::string_view to_string(TaskType type) {
    switch (type) {
        case TaskType::pick: return "pick";
        case TaskType::light: return "light";
        case TaskType::clean: return "clean";
        case TaskType::heat: return "heat";
        case TaskType::cool: return "cool";
        case TaskType::pick_two: return "pick_two";
    }
    return "?";
}

TaskType parse_task_type(std::string_view text) {
    for (auto type : kAllTaskTypes) {
        if (to_string(type) == text) return type;
    }
    if (text == "picktwo" || text == "pick-two") return TaskType::pick_two;
    throw std::invalid_argument("unknown household task type: '" + std::string(text) + "'");
}

std::string Ref::str() const { return index ? name + " " + std::to_string(*index) : name; }

std::string HouseholdAction::str() const {
    const auto obj = object ? object->str() : std::string();
    const auto rec = receptacle ? receptacle->str() : std::string();
    switch (verb) {
        case Verb::go: return "go to " + rec;
        case Verb::take: return "take " + obj + " from " + rec;
        case Verb::put: return "put " + obj + " in/on " + rec;
        case Verb::open: return "open " + rec;
        case Verb::close: return "close " + rec;
        case Verb::heat: return "heat " + obj + " with " + rec;
        case Verb::cool: return "cool " + obj + " with " + rec;
        case Verb::clean: return "clean " + obj + " with " + rec;
        case Verb::use: return "use " + rec;
        case Verb::think: return std::string(kThinkPrefix) + thought;
    }
    return {};
}

std::optional<HouseholdAction> HouseholdAction::parse(std::string_view canonical) {
    static const std::regex go_re(R"(go to ([a-z]+)(?: (\d+))?)");
    static const std::regex take_re(R"(take ([a-z]+)(?: (\d+))? from ([a-z]+)(?: (\d+))?)");
    static const std::regex put_re(R"(put ([a-z]+)(?: (\d+))? in/on ([a-z]+)(?: (\d+))?)");
    static const std::regex open_re(R"((open|close) ([a-z]+)(?: (\d+))?)");
    static const std::regex transform_re(R"((heat|cool|clean) ([a-z]+)(?: (\d+))? with ([a-z]+)(?: (\d+))?)");
    static const std::regex use_re(R"(use ([a-z]+)(?: (\d+))?)");

    const std::string text(canonical);
    if (text.starts_with(kThinkPrefix)) {
        HouseholdAction action;
        action.verb = Verb::think;
        action.thought = text.substr(kThinkPrefix.size());
        if (trim(action.thought).empty() || action.thought.find('\n') != std::string::npos) return std::nullopt;
        return action;
    }
    std::smatch m;
    HouseholdAction action;
    auto fill = [](std::optional<Ref>& slot, const std::ssub_match& name, const std::ssub_match& index) {
        slot = make_ref(name.str(), index.str());
        return slot.has_value();
    };
    if (std::regex_match(text, m, go_re)) {
        action.verb = Verb::go;
        if (!fill(action.receptacle, m[1], m[2])) return std::nullopt;
    } else if (std::regex_match(text, m, take_re)) {
        action.verb = Verb::take;
        if (!fill(action.object, m[1], m[2]) || !fill(action.receptacle, m[3], m[4])) return std::nullopt;
    } else if (std::regex_match(text, m, put_re)) {
        action.verb = Verb::put;
        if (!fill(action.object, m[1], m[2]) || !fill(action.receptacle, m[3], m[4])) return std::nullopt;
    } else if (std::regex_match(text, m, open_re)) {
        action.verb = m[1] == "open" ? Verb::open : Verb::close;
        if (!fill(action.receptacle, m[2], m[3])) return std::nullopt;
    } else if (std::regex_match(text, m, transform_re)) {
        action.verb = m[1] == "heat" ? Verb::heat : m[1] == "cool" ? Verb::cool : Verb::clean;
        if (!fill(action.object, m[2], m[3]) || !fill(action.receptacle, m[4], m[5])) return std::nullopt;
    } else if (std::regex_match(text, m, use_re)) {
        action.verb = Verb::use;
        if (!fill(action.receptacle, m[1], m[2])) return std::nullopt;
    } else {
        return std::nullopt;
    }
    return action;
}

std::optional<std::size_t> WorldState::find_receptacle(std::string_view kind, int index) const {
    for (std::size_t i = 0; i < receptacles.size(); ++i) {
        if (receptacles[i].kind == kind && receptacles[i].index == index) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> WorldState::find_object(std::string_view kind, int index) const {
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (objects[i].kind == kind && objects[i].index == index) return i;
    }
    return std::nullopt;
}

bool WorldState::has_receptacle_kind(std::string_view kind) const {
    return std::any_of(receptacles.begin(), receptacles.end(), [&](const auto& r) { return r.kind == kind; });
}

std::uint64_t WorldState::fingerprint() const {
    std::ostringstream out;
    for (const auto& r : receptacles) out << 'R' << r.kind << ' ' << r.index << r.openable << r.open << ';';
    for (const auto& o : objects) {
        out << 'O' << o.kind << ' ' << o.index << '@' << (o.location ? static_cast<long long>(*o.location) : -1)
            << o.hot << o.cold << o.clean << o.takeable << ';';
    }
    out << 'A' << (agent_location ? static_cast<long long>(*agent_location) : -1);
    out << 'H' << (held ? static_cast<long long>(*held) : -1);
    for (auto slot : lamp_examined) out << 'L' << slot;
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : out.str()) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string Objective::text() const {
    static const std::array<std::array<std::string_view, 2>, 6> templates{{
        {"put a {obj} in {recep}.", "put some {obj} on {recep}."},
        {"look at {obj} under the desklamp.", "examine the {obj} with the desklamp."},
        {"put a clean {obj} in {recep}.", "clean some {obj} and put it in {recep}."},
        {"put a hot {obj} in {recep}.", "heat some {obj} and put it in {recep}."},
        {"put a cool {obj} in {recep}.", "cool some {obj} and put it in {recep}."},
        {"put two {obj} in {recep}.", "find two {obj} and put them in {recep}."},
    }};
    std::string out(templates[static_cast<std::size_t>(type)][template_variant % 2]);
    auto replace = [&out](std::string_view key, const std::string& value) {
        if (auto pos = out.find(key); pos != std::string::npos) out.replace(pos, key.size(), value);
    };
    replace("{obj}", object_kind);
    replace("{recep}", receptacle_kind);
    return out;
}

std::string feedback(std::string_view key, const Vars& vars) {
    const auto& table = feedback_table();
    auto it = table.find(key);
    if (it == table.end()) throw std::out_of_range("unknown feedback key: " + std::string(key));
    std::string out = it->second;
    for (const auto& [name, value] : vars) {
        const std::string placeholder = "{" + name + "}";
        for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos + value.size())) {
            out.replace(pos, placeholder.size(), value);
        }
    }
    return out;
}

namespace {

std::size_t required_targets(TaskType type) { return type == TaskType::pick_two ? 2 : 1; }

bool in_target_kind(const WorldState& state, const Object& object, std::string_view kind) {
    return object.location && state.receptacles[*object.location].kind == kind;
}

// Target instances the oracle can reach, in object order.
std::vector<std::size_t> reachable_targets(const WorldState& state, const Objective& objective) {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
        const auto& object = state.objects[i];
        if (object.kind != objective.object_kind || !object.location || !object.takeable) continue;
        if (!state.receptacles[*object.location].accessible()) continue;
        if (!objective.receptacle_kind.empty() && in_target_kind(state, object, objective.receptacle_kind)) continue;
        slots.push_back(i);
    }
    return slots;
}

std::optional<std::size_t> first_accessible(const WorldState& state, std::string_view kind) {
    for (std::size_t i = 0; i < state.receptacles.size(); ++i) {
        if (state.receptacles[i].kind == kind && state.receptacles[i].accessible()) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> first_of_kind(const WorldState& state, std::string_view kind) {
    for (std::size_t i = 0; i < state.receptacles.size(); ++i) {
        if (state.receptacles[i].kind == kind) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> find_lamp(const WorldState& state) {
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
        if (state.objects[i].kind == "desklamp" && state.objects[i].location) return i;
    }
    return std::nullopt;
}

Ref ref_of(const Receptacle& r) { return {r.kind, r.index}; }
Ref ref_of(const Object& o) { return {o.kind, o.index}; }

HouseholdAction go(const Receptacle& r) { return {Verb::go, std::nullopt, ref_of(r), {}}; }
HouseholdAction take(const Object& o, const Receptacle& r) { return {Verb::take, ref_of(o), ref_of(r), {}}; }
HouseholdAction put(const Object& o, const Receptacle& r) { return {Verb::put, ref_of(o), ref_of(r), {}}; }

}  // namespace

bool is_solvable(const GeneratedWorld& world) {
    const auto& state = world.state;
    const auto& objective = world.objective;
    if (reachable_targets(state, objective).size() < required_targets(objective.type)) return false;
    if (auto appliance = appliance_for(objective.type); !appliance.empty() && !state.has_receptacle_kind(appliance)) {
        return false;
    }
    if (objective.type == TaskType::light) {
        if (!find_lamp(state)) return false;
    } else if (!first_accessible(state, objective.receptacle_kind)) {
        return false;
    }
    return !goal_check(state, objective);
}

GeneratedWorld generate_world(TaskType type, std::uint64_t env_seed) {
    Rng rng(mix_seed(type, env_seed));
    const Names& objects = object_pool(type);
    const Names& targets = target_pool(type);
    Names all_objects;
    for (const auto* pool : {&kHeatObjects, &kCoolObjects, &kCleanObjects, &kPickObjects, &kLightObjects}) {
        for (auto name : *pool) {
            if (std::find(all_objects.begin(), all_objects.end(), name) == all_objects.end()) all_objects.push_back(name);
        }
    }

    for (;;) {
        GeneratedWorld world;
        auto& objective = world.objective;
        objective.type = type;
        objective.object_kind = std::string(rng.pick(objects));
        if (type != TaskType::light) objective.receptacle_kind = std::string(rng.pick(targets));
        objective.template_variant = static_cast<int>(rng.below(2));

        std::map<std::string_view, int> counts;
        if (auto appliance = appliance_for(type); !appliance.empty()) counts[appliance] = 1;
        // Heat kitchens always offer the toaster as a tempting wrong appliance.
        if (type == TaskType::heat) counts["toaster"] = 1;
        std::string_view lamp_host;
        if (type == TaskType::light) {
            lamp_host = rng.below(2) == 0 ? "desk" : "sidetable";
            counts[lamp_host] = 1;
        }
        if (!objective.receptacle_kind.empty()) counts[objective.receptacle_kind] = std::max(counts[objective.receptacle_kind], 1);

        const std::size_t receptacle_total = 8 + rng.below(7);
        for (std::size_t guard = 0; guard < 200; ++guard) {
            std::size_t total = 0;
            for (const auto& [kind, n] : counts) total += static_cast<std::size_t>(n);
            if (total >= receptacle_total) break;
            const auto& spec = kReceptacleCatalog[rng.below(kReceptacleCatalog.size())];
            if (counts[spec.kind] < spec.max_count) ++counts[spec.kind];
        }

        auto& state = world.state;
        for (const auto& [kind, n] : counts) {
            const auto& spec = receptacle_spec(kind);
            for (int i = 1; i <= n; ++i) {
                const bool open = !spec.openable || !rng.chance(0.6);
                state.receptacles.push_back({std::string(kind), i, spec.openable, open});
            }
        }

        std::map<std::string, int> object_counts;
        auto add_object = [&](std::string_view kind, std::size_t slot, bool takeable) {
            Object object;
            object.kind = std::string(kind);
            object.index = ++object_counts[object.kind];
            object.location = slot;
            object.takeable = takeable;
            state.objects.push_back(std::move(object));
        };

        std::optional<std::size_t> lamp_slot;
        if (type == TaskType::light) {
            lamp_slot = first_of_kind(state, lamp_host);
            add_object("desklamp", *lamp_slot, false);
        }

        std::vector<std::size_t> target_hosts;
        std::optional<std::size_t> garbage;
        for (std::size_t i = 0; i < state.receptacles.size(); ++i) {
            const auto& kind = state.receptacles[i].kind;
            if (kind == "garbagecan") garbage = i;
            if (kind == objective.receptacle_kind || kind == "toaster" || kind == "garbagecan") continue;
            if (lamp_slot && i == *lamp_slot) continue;
            target_hosts.push_back(i);
        }
        if (target_hosts.empty()) continue;

        const std::size_t target_total = required_targets(type) + rng.below(2);
        for (std::size_t i = 0; i < target_total; ++i) {
            // Occasional atypical placement.
            const std::size_t slot = garbage && rng.chance(0.05) ? *garbage : rng.pick(target_hosts);
            add_object(objective.object_kind, slot, true);
        }

        const std::size_t object_total = 10 + rng.below(11);
        while (state.objects.size() < object_total) {
            const auto kind = rng.pick(all_objects);
            if (kind == objective.object_kind) continue;
            std::size_t slot = rng.below(state.receptacles.size());
            if (state.receptacles[slot].kind == "toaster") continue;
            add_object(kind, slot, true);
        }

        if (is_solvable(world)) return world;
    }
}

std::string instance_id(TaskType type, Split split, std::uint64_t env_seed) {
    return std::string(to_string(type)) + "-" + std::string(to_string(split)) + "-" + std::to_string(env_seed);
}

std::string describe_task(std::string_view id, const Objective& objective) {
    std::string out = "Task: " + std::string(id) + "\n";
    out +=
        "You are in a household and interact with it through text actions. Available actions:\n"
        "go to {recep} {i}\n"
        "take {obj} {i} from {recep} {j}\n"
        "put {obj} {i} in/on {recep} {j}\n"
        "open {recep} {i}\n"
        "close {recep} {i}\n"
        "heat {obj} {i} with {recep} {j}\n"
        "cool {obj} {i} with {recep} {j}\n"
        "clean {obj} {i} with {recep} {j}\n"
        "use {recep} {i}\n"
        "think: {your reasoning}\n"
        "Objects and receptacles are always named with their index, e.g. apple 1 or cabinet 2.\n";
    out += "Your task is to: " + objective.text();
    return out;
}

std::string initial_observation(const WorldState& state) {
    std::vector<std::string> labels;
    labels.reserve(state.receptacles.size());
    for (const auto& receptacle : state.receptacles) labels.push_back(receptacle.label());
    return "You are in the middle of a room. Looking quickly around you, you see " + with_article_list(labels) + ".";
}

StepOutcome apply_action(WorldState& state, const HouseholdAction& action) {
    switch (action.verb) {
        case Verb::go: return do_go(state, action);
        case Verb::take: return do_take(state, action);
        case Verb::put: return do_put(state, action);
        case Verb::open:
        case Verb::close: return do_open_close(state, action);
        case Verb::heat:
        case Verb::cool:
        case Verb::clean: return do_transform(state, action);
        case Verb::use: return do_use(state, action);
        case Verb::think: return {feedback("think"), true};
    }
    return fail("invalid_action");
}

bool goal_check(const WorldState& state, const Objective& objective) {
    if (objective.type == TaskType::light) {
        return std::any_of(state.lamp_examined.begin(), state.lamp_examined.end(),
                           [&](std::size_t slot) { return state.objects[slot].kind == objective.object_kind; });
    }
    std::size_t placed = 0;
    for (const auto& object : state.objects) {
        if (object.kind != objective.object_kind || !in_target_kind(state, object, objective.receptacle_kind)) continue;
        const bool transformed = objective.type == TaskType::heat    ? object.hot
                                 : objective.type == TaskType::cool  ? object.cold
                                 : objective.type == TaskType::clean ? object.clean
                                                                     : true;
        if (transformed) ++placed;
    }
    return placed >= required_targets(objective.type);
}

std::vector<HouseholdAction> oracle_sequence(const WorldState& state, const Objective& objective) {
    const auto targets = reachable_targets(state, objective);
    if (targets.size() < required_targets(objective.type)) {
        throw std::logic_error("world has no reachable target object for the oracle");
    }
    std::vector<HouseholdAction> actions;
    const auto& first = state.objects[targets[0]];
    const auto& first_host = state.receptacles[*first.location];
    actions.push_back(go(first_host));
    actions.push_back(take(first, first_host));

    if (objective.type == TaskType::light) {
        const auto lamp = find_lamp(state);
        if (!lamp) throw std::logic_error("world has no desklamp for the oracle");
        actions.push_back(go(state.receptacles[*state.objects[*lamp].location]));
        actions.push_back({Verb::use, std::nullopt, ref_of(state.objects[*lamp]), {}});
        return actions;
    }

    const auto target_slot = first_accessible(state, objective.receptacle_kind);
    if (!target_slot) throw std::logic_error("world has no accessible target receptacle for the oracle");
    const auto& target = state.receptacles[*target_slot];

    if (auto appliance_kind = appliance_for(objective.type); !appliance_kind.empty()) {
        const auto& appliance = state.receptacles[*first_of_kind(state, appliance_kind)];
        const Verb verb = objective.type == TaskType::heat   ? Verb::heat
                          : objective.type == TaskType::cool ? Verb::cool
                                                             : Verb::clean;
        actions.push_back(go(appliance));
        actions.push_back({verb, ref_of(first), ref_of(appliance), {}});
    }
    actions.push_back(go(target));
    actions.push_back(put(first, target));

    if (objective.type == TaskType::pick_two) {
        const auto& second = state.objects[targets[1]];
        const auto& second_host = state.receptacles[*second.location];
        actions.push_back(go(second_host));
        actions.push_back(take(second, second_host));
        actions.push_back(go(target));
        actions.push_back(put(second, target));
    }
    return actions;
}

}  // namespace autoplan::household
