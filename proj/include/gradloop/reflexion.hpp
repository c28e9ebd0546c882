#pragma once

#include "gradloop/clock.hpp"
#include "gradloop/core.hpp"
#include "gradloop/gateway.hpp"
#include "gradloop/textgrad.hpp"
#include "gradloop/todo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gradloop {

// Creation-time cap on reflexion verbosity (working-memory budget).
inline constexpr int kReflexionTokenCap = 350;

// A textual causal insight tied to one step.
struct Reflexion {
    int step_index = 0;
    std::string text;
    bool success = false;
    std::string action;
    std::string observation;
    std::int64_t created_at = 0;
};

struct HistoryEntry {
    std::string action;
    std::string observation;
    std::string reflection;
    bool success = false;
};

// Up to k prior steps, ordered oldest → newest.
struct HistoryContext {
    std::vector<HistoryEntry> entries;
};

// Reflect every reflect_every steps (step_index is 0-based, so the trigger is
// (step_index+1) % reflect_every == 0) or whenever the step failed.
bool should_reflect(int step_index, const StepRecord& outcome, const EpisodeConfig& cfg);

HistoryContext build_history_context(const std::vector<Reflexion>& working, int k);

class ReflexionEngine {
public:
    ReflexionEngine(Gateway& gateway, const Clock& clock) : gw_(gateway), clock_(clock) {}

    // History-aware causal reflexion for the current step. Gateway failures
    // skip the reflexion (nullopt); they never abort an episode. The result
    // mirrors the step's success flag and is capped at kReflexionTokenCap
    // tokens (cut at a sentence boundary).
    std::optional<Reflexion> generate(const StepRecord& current, const HistoryContext& history,
                                      const std::vector<TextualGradient>& recent_gradients,
                                      const TodoItem* current_todo);

    // Deterministic prompt assembly, in order: history blocks, current step
    // block, recent gradient directions, active TODO.
    std::string build_prompt(const StepRecord& current, const HistoryContext& history,
                             const std::vector<TextualGradient>& recent_gradients,
                             const TodoItem* current_todo) const;

private:
    Gateway& gw_;
    const Clock& clock_;
};

}  // namespace gradloop
