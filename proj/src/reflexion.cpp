#include "gradloop/reflexion.hpp"

#include "gradloop/text.hpp"

namespace gradloop {

bool should_reflect(int step_index, const StepRecord& outcome, const EpisodeConfig& cfg) {
    if (!outcome.success) return true;
    return (step_index + 1) % cfg.reflect_every == 0;
}

HistoryContext build_history_context(const std::vector<Reflexion>& working, int k) {
    HistoryContext ctx;
    const std::size_t n = working.size();
    const std::size_t take = std::min<std::size_t>(n, static_cast<std::size_t>(k));
    for (std::size_t i = n - take; i < n; ++i) {
        const Reflexion& r = working[i];
        ctx.entries.push_back({r.action, r.observation, r.text, r.success});
    }
    return ctx;
}

std::string ReflexionEngine::build_prompt(const StepRecord& current,
                                          const HistoryContext& history,
                                          const std::vector<TextualGradient>& recent_gradients,
                                          const TodoItem* current_todo) const {
    std::string p;
    const int n = static_cast<int>(history.entries.size());
    for (int i = 0; i < n; ++i) {
        const HistoryEntry& e = history.entries[i];
        p += "Step -" + std::to_string(n - i) + ": Action: " + e.action + "\n";
        p += "         Result: " + e.observation + "\n";
        p += std::string("         Status: ") + (e.success ? "SUCCESS" : "FAILED") + "\n";
        p += "         Insight: " + e.reflection + "\n\n";
    }
    p += "Current: Action: " + current.action + "\n";
    p += "         Result: " + current.next_state + "\n";
    p += std::string("         Status: ") + (current.success ? "SUCCESS" : "FAILED") + "\n\n";
    p += "What key insight should we remember?\n";
    if (!recent_gradients.empty()) {
        p += "\nRecent strategy adjustments (from TextGrad):\n";
        std::size_t start = recent_gradients.size() > 3 ? recent_gradients.size() - 3 : 0;
        for (std::size_t i = start; i < recent_gradients.size(); ++i) {
            const TextualGradient& g = recent_gradients[i];
            int offset = g.step_index - current.step_index;
            p += "- Step " + std::to_string(offset) + ": \"" + g.direction + "\"\n";
        }
        p += "\nGiven these strategic priorities and current outcome,\n";
        p += "what insight should we capture?\n";
    }
    if (current_todo) {
        p += "\nCURRENT TODO: " + current_todo->description + "\n";
    }
    return p;
}

std::optional<Reflexion> ReflexionEngine::generate(
    const StepRecord& current, const HistoryContext& history,
    const std::vector<TextualGradient>& recent_gradients, const TodoItem* current_todo) {
    const std::string prompt = build_prompt(current, history, recent_gradients, current_todo);
    CompletionResult res;
    try {
        res = gw_.complete(PromptRequest::make(Role::reflexion, prompt));
    } catch (const GatewayError&) {
        return std::nullopt;  // reflexion is best-effort; the episode continues
    }
    Reflexion r;
    r.step_index = current.step_index;
    r.text = truncate_tokens_sentence(trim(res.text), kReflexionTokenCap);
    r.success = current.success;
    r.action = current.action;
    r.observation = current.next_state;
    r.created_at = clock_.now();
    return r;
}

}  // namespace gradloop
