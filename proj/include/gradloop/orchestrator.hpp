#pragma once

#include "gradloop/clock.hpp"
#include "gradloop/core.hpp"
#include "gradloop/gateway.hpp"
#include "gradloop/memory.hpp"
#include "gradloop/microworld.hpp"
#include "gradloop/reflexion.hpp"
#include "gradloop/textgrad.hpp"
#include "gradloop/todo.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gradloop {

// Component gating. full keeps the three-way coupling; the other presets are
// the ablation configurations.
struct AgentMode {
    bool use_reflexion = true;
    bool use_textgrad = true;
    bool bidirectional_coupling = true;

    static AgentMode full() { return {true, true, true}; }
    static AgentMode reflexion_only() { return {true, false, true}; }
    static AgentMode textgrad_only() { return {false, true, true}; }
    static AgentMode sequential() { return {true, true, false}; }
};

std::string to_string(const AgentMode& m);
AgentMode agent_mode_from_string(const std::string& s);

struct TrialResult {
    int trial_index = 0;
    std::vector<EpisodeResult> episodes;
    double success_rate = 0.0;
    double mean_steps = 0.0;
    int total_loops = 0;
    int alignment_matches = 0;
    int alignment_total = 0;

    // pooled across episodes; meaningless (0) when no gradient ever carried
    // a recommendation
    double alignment() const {
        return alignment_total == 0 ? 0.0
                                    : static_cast<double>(alignment_matches) / alignment_total;
    }
};

TrialResult aggregate_trial(int trial_index, std::vector<EpisodeResult> episodes);

nlohmann::json to_json(const TextualGradient& g);
nlohmann::json to_json(const Reflexion& r);

struct StepTraceEntry {
    StepRecord record;
    nlohmann::json todos;  // snapshot after this step's update
    std::optional<TextualGradient> gradient;
    std::optional<Reflexion> reflexion;
    int policy_version = 0;
    bool merged = false;
};

struct PolicyVersionEntry {
    int version = 0;
    int step_index = 0;  // -1 for the end-of-episode flush
    std::string text;
};

struct EpisodeTrace {
    EnvSpec env;
    int trial_index = 0;
    nlohmann::json decomposition;
    std::vector<MemoryEntry> retrieved;
    std::vector<StepTraceEntry> steps;
    std::vector<PolicyVersionEntry> policy_history;  // every merged prompt version
    bool final_merge = false;
    int final_policy_version = 0;
    EpisodeResult result;
};

nlohmann::json to_json(const EpisodeTrace& t);

struct OrchestratorOptions {
    EpisodeConfig cfg;
    AgentMode mode = AgentMode::full();
    CompressionMode compression = CompressionMode::tiered;
    std::int64_t clock_step_seconds = 10;
};

// The dual-loop executor: decompose + retrieve at init, then per step
// action selection, environment step, gradient, reflexion, dual-verified
// TODO update, and cadence-driven policy merges; consolidation and pruning
// at episode end.
class Orchestrator {
public:
    Orchestrator(Gateway& gw, SimClock& clock, OrchestratorOptions opts);

    EpisodeResult run_episode(const EnvSpec& spec, TextEnv& env, ConsolidatedStore& store,
                              EpisodicArchive& archive, int trial_index,
                              EpisodeTrace* trace = nullptr);

    std::string select_action(const PolicyPrompt& policy, const std::string& state,
                              const std::vector<MemoryEntry>& memories, const TodoItem* todo);

    const OrchestratorOptions& options() const { return opts_; }

private:
    Gateway& gw_;
    SimClock& clock_;
    OrchestratorOptions opts_;
    TodoPlanner planner_;
    ReflexionEngine reflexion_engine_;
    TextGradOptimizer optimizer_;
};

struct BenchmarkOptions {
    OrchestratorOptions orchestrator;
    std::vector<EnvSpec> envs;
    int trials = 2;
    bool record_sessions = true;
    std::string backend_descriptor;  // recorded in the manifest
};

// The 9-environment fixture suite (3 families x seeds 0..2); the closed-
// drawer look environment runs first.
std::vector<EnvSpec> default_benchmark_envs(int horizon = 28);

// Runs trials sequentially. Trial 0 starts from an empty consolidated store;
// every later trial loads the store persisted by its predecessor from the
// run directory. Writes manifest.json and config.json before the first
// episode, per-episode trace files, store.json / archive.ndjson per trial,
// and metrics.json + timings.json at the end.
std::vector<TrialResult> run_benchmark(Gateway& gw, SimClock& clock, const BenchmarkOptions& opts,
                                       const std::filesystem::path& run_dir);

nlohmann::json metrics_to_json(const std::vector<TrialResult>& trials,
                               const BenchmarkOptions& opts);

}  // namespace gradloop
