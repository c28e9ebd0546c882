#pragma once

#include "gradloop/core.hpp"
#include "gradloop/gateway.hpp"
#include "gradloop/memory_types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gradloop {

struct GatewayFileConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_minimal = "primary-minimal";
    std::string model_medium = "primary-medium";
    std::string model_lightweight = "aux-light";
    // Only the API key may come from the environment; everything else is
    // file/flag configured.
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 60;
    bool cache_lightweight = true;
};

struct RunFileConfig {
    EpisodeConfig episode;
    GatewayFileConfig gateway;
    int trials = 2;
    std::string mode = "full";
    std::string compression = "tiered";
    std::int64_t clock_step_seconds = 10;
    bool record_sessions = true;
    std::string backend = "live";  // live | scripted:<rules> | replay:<dir>
    std::string out_dir;           // may instead come from the --out flag
    std::vector<EnvSpec> envs;     // empty: the default 9-env suite
};

RunFileConfig parse_run_config(const nlohmann::json& j);
RunFileConfig load_run_config(const std::filesystem::path& path);

LiveConfig make_live_config(const GatewayFileConfig& g);

}  // namespace gradloop
