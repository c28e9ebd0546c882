#include "gradloop/core.hpp"

#include <stdexcept>

namespace gradloop {

std::string to_string(TaskFamily f) {
    switch (f) {
        case TaskFamily::pick_cool_then_place: return "pick_cool_then_place";
        case TaskFamily::pick_two_obj_and_place: return "pick_two_obj_and_place";
        case TaskFamily::look_at_obj_in_light: return "look_at_obj_in_light";
    }
    throw std::logic_error("unreachable task family");
}

TaskFamily task_family_from_string(const std::string& s) {
    if (s == "pick_cool_then_place") return TaskFamily::pick_cool_then_place;
    if (s == "pick_two_obj_and_place") return TaskFamily::pick_two_obj_and_place;
    if (s == "look_at_obj_in_light") return TaskFamily::look_at_obj_in_light;
    throw std::invalid_argument("unknown task family: " + s);
}

std::optional<ConfigError> validate_config(const EpisodeConfig& cfg) {
    auto positive_int = [](const char* name, int v) -> std::optional<ConfigError> {
        if (v < 1) return ConfigError{name, "must be >= 1"};
        return std::nullopt;
    };
    auto positive_real = [](const char* name, double v) -> std::optional<ConfigError> {
        if (!(v > 0.0)) return ConfigError{name, "must be > 0"};
        return std::nullopt;
    };
    if (auto e = positive_int("history_window_k", cfg.history_window_k)) return e;
    if (auto e = positive_int("reflect_every", cfg.reflect_every)) return e;
    if (auto e = positive_int("retrieve_top_k", cfg.retrieve_top_k)) return e;
    if (auto e = positive_real("strength_threshold", cfg.strength_threshold)) return e;
    if (auto e = positive_real("decay_rate_per_hour", cfg.decay_rate_per_hour)) return e;
    if (auto e = positive_real("prune_below", cfg.prune_below)) return e;
    if (auto e = positive_int("merge_every", cfg.merge_every)) return e;
    if (auto e = positive_int("horizon", cfg.horizon)) return e;
    if (auto e = positive_real("discount_gamma", cfg.discount_gamma)) return e;
    return std::nullopt;
}

StepRecord make_step_record(int step_index, std::string state, std::string action, double reward,
                            std::string next_state, std::optional<int> todo_id_active) {
    StepRecord r;
    r.step_index = step_index;
    r.state = std::move(state);
    r.action = std::move(action);
    r.reward = reward;
    r.next_state = std::move(next_state);
    r.success = reward > 0.0;
    r.todo_id_active = todo_id_active;
    return r;
}

nlohmann::json to_json(const EnvSpec& s) {
    return {{"task_description", s.task_description},
            {"task_family", to_string(s.task_family)},
            {"seed", s.seed},
            {"horizon", s.horizon}};
}

nlohmann::json to_json(const StepRecord& r) {
    nlohmann::json j = {{"step_index", r.step_index}, {"state", r.state},
                        {"action", r.action},         {"reward", r.reward},
                        {"next_state", r.next_state}, {"success", r.success}};
    if (r.todo_id_active) {
        j["todo_id_active"] = *r.todo_id_active;
    } else {
        j["todo_id_active"] = nullptr;
    }
    return j;
}

nlohmann::json to_json(const EpisodeResult& r) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.trace) steps.push_back(to_json(s));
    return {{"env", to_json(r.env)},
            {"trial_index", r.trial_index},
            {"success", r.success},
            {"steps_taken", r.steps_taken},
            {"loop_count", r.loop_count},
            {"alignment_numerator", r.alignment_numerator},
            {"alignment_denominator", r.alignment_denominator},
            {"trace", steps}};
}

nlohmann::json to_json(const EpisodeConfig& c) {
    return {{"history_window_k", c.history_window_k},
            {"reflect_every", c.reflect_every},
            {"retrieve_top_k", c.retrieve_top_k},
            {"strength_threshold", c.strength_threshold},
            {"decay_rate_per_hour", c.decay_rate_per_hour},
            {"prune_below", c.prune_below},
            {"merge_every", c.merge_every},
            {"horizon", c.horizon},
            {"discount_gamma", c.discount_gamma}};
}

EnvSpec env_spec_from_json(const nlohmann::json& j) {
    EnvSpec s;
    s.task_description = j.at("task_description").get<std::string>();
    s.task_family = task_family_from_string(j.at("task_family").get<std::string>());
    s.seed = j.at("seed").get<int>();
    s.horizon = j.at("horizon").get<int>();
    return s;
}

StepRecord step_record_from_json(const nlohmann::json& j) {
    StepRecord r;
    r.step_index = j.at("step_index").get<int>();
    r.state = j.at("state").get<std::string>();
    r.action = j.at("action").get<std::string>();
    r.reward = j.at("reward").get<double>();
    r.next_state = j.at("next_state").get<std::string>();
    r.success = j.at("success").get<bool>();
    if (j.contains("todo_id_active") && !j.at("todo_id_active").is_null()) {
        r.todo_id_active = j.at("todo_id_active").get<int>();
    }
    return r;
}

EpisodeResult episode_result_from_json(const nlohmann::json& j) {
    EpisodeResult r;
    r.env = env_spec_from_json(j.at("env"));
    r.trial_index = j.at("trial_index").get<int>();
    r.success = j.at("success").get<bool>();
    r.steps_taken = j.at("steps_taken").get<int>();
    r.loop_count = j.at("loop_count").get<int>();
    r.alignment_numerator = j.at("alignment_numerator").get<int>();
    r.alignment_denominator = j.at("alignment_denominator").get<int>();
    for (const auto& s : j.at("trace")) r.trace.push_back(step_record_from_json(s));
    return r;
}

EpisodeConfig episode_config_from_json(const nlohmann::json& j) {
    EpisodeConfig c;
    if (j.contains("history_window_k")) c.history_window_k = j.at("history_window_k").get<int>();
    if (j.contains("reflect_every")) c.reflect_every = j.at("reflect_every").get<int>();
    if (j.contains("retrieve_top_k")) c.retrieve_top_k = j.at("retrieve_top_k").get<int>();
    if (j.contains("strength_threshold"))
        c.strength_threshold = j.at("strength_threshold").get<double>();
    if (j.contains("decay_rate_per_hour"))
        c.decay_rate_per_hour = j.at("decay_rate_per_hour").get<double>();
    if (j.contains("prune_below")) c.prune_below = j.at("prune_below").get<double>();
    if (j.contains("merge_every")) c.merge_every = j.at("merge_every").get<int>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
    if (j.contains("discount_gamma")) c.discount_gamma = j.at("discount_gamma").get<double>();
    return c;
}

}  // namespace gradloop
