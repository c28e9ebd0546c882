#pragma once

#include "gradloop/core.hpp"
#include "gradloop/gateway.hpp"
#include "gradloop/todo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gradloop {

struct Reflexion;  // reflexion.hpp

// The evolving instruction text conditioning action selection; the
// "parameters" that textual gradients optimize. version increments exactly
// on merge.
struct PolicyPrompt {
    std::string text;
    int version = 0;
    std::vector<std::string> component_tags;

    static PolicyPrompt initial();
};

// Structured improvement signal parsed from one gradient completion.
struct TextualGradient {
    int step_index = 0;
    std::string pattern_high;
    std::string pattern_low;
    std::string direction;
    std::string recommended_action;
    ProgressSignal progress = ProgressSignal::no_progress;
    std::string raw;
};

// Serializes the five labeled lines (PATTERN HIGH / PATTERN LOW / DIRECTION /
// RECOMMENDED ACTION / PROGRESS).
std::string format_gradient(const TextualGradient& g);

// Inverse of format_gradient over the labeled-line format. Missing
// PATTERN/DIRECTION fields are tolerated as empty; a missing or empty
// RECOMMENDED ACTION, or a missing/unknown PROGRESS value, yields nullopt.
std::optional<TextualGradient> parse_gradient(const std::string& raw, int step_index);

struct AlignmentTracker {
    int matches = 0;
    int total = 0;
    double ratio() const { return total == 0 ? 0.0 : static_cast<double>(matches) / total; }
};

// total+1; matches+1 iff the normalized strings agree (lowercase, collapsed
// whitespace, trailing punctuation stripped).
AlignmentTracker record_alignment(AlignmentTracker t, const std::string& recommended,
                                  const std::string& executed);

class TextGradOptimizer {
public:
    explicit TextGradOptimizer(Gateway& gateway) : gw_(gateway) {}

    // Per-step gradient: the prompt carries the outcome, the active TODO
    // status, and every reflexion generated earlier in the episode. One
    // reprompt when the mandatory fields are missing; nullopt discards the
    // gradient for this step.
    std::optional<TextualGradient> compute_gradient(const StepRecord& outcome,
                                                    const PolicyPrompt& prompt,
                                                    const std::vector<Reflexion>& reflexions,
                                                    const TodoItem* todo);

    // LLM-based semantic merge of accumulated gradients into the policy
    // prompt. Requires a non-empty pending buffer. Throws GatewayError on
    // backend failure (caller keeps the prompt and buffer unchanged). The
    // merged text is held to at most twice the original token count, with
    // one brevity re-request before hard truncation.
    PolicyPrompt merge_policy(const PolicyPrompt& prompt,
                              const std::vector<TextualGradient>& pending);

    std::string build_gradient_prompt(const StepRecord& outcome, const PolicyPrompt& prompt,
                                      const std::vector<Reflexion>& reflexions,
                                      const TodoItem* todo) const;

private:
    Gateway& gw_;
};

}  // namespace gradloop
