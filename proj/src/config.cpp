#include "gradloop/config.hpp"

#include <cstdlib>
#include <fstream>

namespace gradloop {

RunFileConfig parse_run_config(const nlohmann::json& j) {
    RunFileConfig cfg;
    if (j.contains("episode")) cfg.episode = episode_config_from_json(j.at("episode"));
    if (j.contains("gateway")) {
        const auto& g = j.at("gateway");
        if (g.contains("endpoint_url")) cfg.gateway.endpoint_url = g.at("endpoint_url");
        if (g.contains("model_minimal")) cfg.gateway.model_minimal = g.at("model_minimal");
        if (g.contains("model_medium")) cfg.gateway.model_medium = g.at("model_medium");
        if (g.contains("model_lightweight"))
            cfg.gateway.model_lightweight = g.at("model_lightweight");
        if (g.contains("api_key_env")) cfg.gateway.api_key_env = g.at("api_key_env");
        if (g.contains("timeout_s")) cfg.gateway.timeout_s = g.at("timeout_s");
        if (g.contains("cache_lightweight")) cfg.gateway.cache_lightweight = g.at("cache_lightweight");
    }
    if (j.contains("benchmark")) {
        const auto& b = j.at("benchmark");
        if (b.contains("trials")) cfg.trials = b.at("trials");
        if (b.contains("mode")) cfg.mode = b.at("mode");
        if (b.contains("compression")) cfg.compression = b.at("compression");
        if (b.contains("clock_step_seconds")) cfg.clock_step_seconds = b.at("clock_step_seconds");
        if (b.contains("record_sessions")) cfg.record_sessions = b.at("record_sessions");
        if (b.contains("backend")) cfg.backend = b.at("backend");
        if (b.contains("out_dir")) cfg.out_dir = b.at("out_dir");
        if (b.contains("envs")) {
            for (const auto& e : b.at("envs")) cfg.envs.push_back(env_spec_from_json(e));
        }
    }
    return cfg;
}

RunFileConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("bad config JSON in " + path.string() + ": " + e.what());
    }
    try {
        return parse_run_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("bad config fields in " + path.string() + ": " + e.what());
    }
}

LiveConfig make_live_config(const GatewayFileConfig& g) {
    LiveConfig live;
    live.endpoint_url = g.endpoint_url;
    live.model_minimal = g.model_minimal;
    live.model_medium = g.model_medium;
    live.model_lightweight = g.model_lightweight;
    live.timeout_s = g.timeout_s;
    if (const char* key = std::getenv(g.api_key_env.c_str())) live.api_key = key;
    return live;
}

}  // namespace gradloop
