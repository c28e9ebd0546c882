#pragma once

#include "gradloop/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gradloop {

struct StepOutcome {
    std::string observation;
    double reward = 0.0;
    bool done = false;
};

// Adapter seam: any text environment exposing reset/step can sit behind the
// orchestrator (a real ALFWorld bridge would implement this over a textual
// transport).
class TextEnv {
public:
    virtual ~TextEnv() = default;
    virtual std::string reset() = 0;
    virtual StepOutcome step(const std::string& action) = 0;
};

struct WorldLocation {
    std::string name;
    bool is_container = false;
    bool open = false;
};

struct WorldObject {
    std::string name;
    std::string location;  // a location name, or kInventory
    bool cooled = false;
    bool heated = false;
    bool cleaned = false;
    bool is_lamp = false;
    bool lit = false;
};

inline constexpr const char* kInventory = "inventory";

struct GoalSpec {
    TaskFamily family = TaskFamily::pick_cool_then_place;
    std::vector<std::string> targets;
    std::string receptacle;  // pick families
    std::string lamp;        // look family
};

struct WorldModel {
    std::vector<WorldLocation> locations;
    std::vector<WorldObject> objects;
    std::string agent_at;  // empty = middle of the room
    GoalSpec goal;
    int horizon = 28;
    int steps_elapsed = 0;
    bool done = false;
    bool reward_given = false;

    const WorldLocation* find_location(const std::string& name) const;
    WorldLocation* find_location(const std::string& name);
    const WorldObject* find_object(const std::string& name) const;
    WorldObject* find_object(const std::string& name);
    std::vector<const WorldObject*> objects_at(const std::string& loc) const;
    const WorldObject* holding() const;  // nullptr when hands are empty
};

// Deterministic household text world. Actions follow the grammar
//   go to X | take X [from Y] | open X | close X | examine X | look |
//   clean X with Y | cool X with Y | heat X with Y | put X in/on Y |
//   use X [with Y]
// Anything unparsable observes "Nothing happens." at reward 0. Reward is
// sparse: 1 exactly when the task goal is satisfied, once per episode.
class Microworld : public TextEnv {
public:
    explicit Microworld(const EnvSpec& spec);
    explicit Microworld(WorldModel model);  // custom worlds for tests

    std::string reset() override;
    StepOutcome step(const std::string& action) override;

    const WorldModel& model() const { return world_; }
    std::string render_map() const;

    static WorldModel generate(const EnvSpec& spec);
    static std::string default_task_description(TaskFamily f);

private:
    std::optional<EnvSpec> spec_;
    WorldModel initial_;
    WorldModel world_;
};

// Re-issues of an action that already failed in the identical observation.
int loop_count(const std::vector<StepRecord>& trace);

}  // namespace gradloop
