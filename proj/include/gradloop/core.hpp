#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace gradloop {

enum class TaskFamily { pick_cool_then_place, pick_two_obj_and_place, look_at_obj_in_light };

std::string to_string(TaskFamily f);
TaskFamily task_family_from_string(const std::string& s);  // throws std::invalid_argument

// One benchmark environment: a task in a seeded deterministic world.
struct EnvSpec {
    std::string task_description;
    TaskFamily task_family = TaskFamily::pick_cool_then_place;
    int seed = 0;
    int horizon = 28;
};

// Agent hyperparameters. Defaults mirror the reference configuration.
struct EpisodeConfig {
    int history_window_k = 5;
    int reflect_every = 5;        // steps between periodic reflexions
    int retrieve_top_k = 6;
    double strength_threshold = 3.0;  // retrieval eligibility
    double decay_rate_per_hour = 0.995;
    double prune_below = 0.1;
    int merge_every = 3;          // gradient accumulation window
    int horizon = 28;
    double discount_gamma = 1.0;  // recorded for metrics only; never drives control
};

struct ConfigError {
    std::string field;
    std::string message;
};

// Returns nullopt when every invariant holds, otherwise the first violated field.
std::optional<ConfigError> validate_config(const EpisodeConfig& cfg);

// One environment transition with its annotations. success is a pure
// function of the reward sign.
struct StepRecord {
    int step_index = 0;
    std::string state;
    std::string action;
    double reward = 0.0;
    std::string next_state;
    bool success = false;
    std::optional<int> todo_id_active;

    bool operator==(const StepRecord&) const = default;
};

StepRecord make_step_record(int step_index, std::string state, std::string action, double reward,
                            std::string next_state, std::optional<int> todo_id_active = {});

struct EpisodeResult {
    EnvSpec env;
    int trial_index = 0;
    bool success = false;
    int steps_taken = 0;
    int loop_count = 0;
    int alignment_numerator = 0;
    int alignment_denominator = 0;
    std::vector<StepRecord> trace;
};

// Canonical JSON schema (lowercase snake_case field names) shared by trace
// files and replay.
nlohmann::json to_json(const EnvSpec& s);
nlohmann::json to_json(const StepRecord& r);
nlohmann::json to_json(const EpisodeResult& r);
nlohmann::json to_json(const EpisodeConfig& c);
EnvSpec env_spec_from_json(const nlohmann::json& j);
StepRecord step_record_from_json(const nlohmann::json& j);
EpisodeResult episode_result_from_json(const nlohmann::json& j);
EpisodeConfig episode_config_from_json(const nlohmann::json& j);

}  // namespace gradloop
