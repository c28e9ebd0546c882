#include "gradloop/textgrad.hpp"

#include "gradloop/reflexion.hpp"
#include "gradloop/text.hpp"

#include <cstdio>

namespace gradloop {

PolicyPrompt PolicyPrompt::initial() {
    PolicyPrompt p;
    p.text =
        "You are an agent interacting with a text environment to complete a task.\n"
        "Guidance:\n"
        "- Environment understanding: Observe and learn the environment's rules through "
        "interaction\n"
        "- Action discovery: Try different action formats to discover what works\n"
        "- Pattern recognition: Identify patterns in successes and failures\n"
        "- Hypothesis testing: Form and test hypotheses about environment constraints\n"
        "- Adaptive strategy: Adapt behavior based on discovered patterns\n"
        "- Task decomposition: Analyze the task to identify required objects and locations\n";
    p.version = 0;
    p.component_tags = {"environment_understanding", "action_discovery", "pattern_recognition",
                        "hypothesis_testing",        "adaptive_strategy", "task_decomposition"};
    return p;
}

std::string format_gradient(const TextualGradient& g) {
    std::string s;
    s += "PATTERN HIGH: " + g.pattern_high + "\n";
    s += "PATTERN LOW: " + g.pattern_low + "\n";
    s += "DIRECTION: " + g.direction + "\n";
    s += "RECOMMENDED ACTION: " + g.recommended_action + "\n";
    s += "PROGRESS: " + to_string(g.progress) + "\n";
    return s;
}

std::optional<TextualGradient> parse_gradient(const std::string& raw, int step_index) {
    TextualGradient g;
    g.step_index = step_index;
    g.raw = raw;
    bool have_progress = false;
    auto value_after = [](const std::string& line, const std::string& label) {
        return trim(line.substr(label.size()));
    };
    for (const auto& raw_line : split_lines(raw)) {
        std::string line = trim(raw_line);
        if (line.rfind("PATTERN HIGH:", 0) == 0) {
            g.pattern_high = value_after(line, "PATTERN HIGH:");
        } else if (line.rfind("PATTERN LOW:", 0) == 0) {
            g.pattern_low = value_after(line, "PATTERN LOW:");
        } else if (line.rfind("DIRECTION:", 0) == 0) {
            g.direction = value_after(line, "DIRECTION:");
        } else if (line.rfind("RECOMMENDED ACTION:", 0) == 0) {
            g.recommended_action = value_after(line, "RECOMMENDED ACTION:");
        } else if (line.rfind("PROGRESS:", 0) == 0) {
            try {
                g.progress = progress_from_string(to_lower(value_after(line, "PROGRESS:")));
                have_progress = true;
            } catch (const std::invalid_argument&) {
                // unknown value: treated as missing
            }
        }
    }
    if (g.recommended_action.empty() || !have_progress) return std::nullopt;
    return g;
}

AlignmentTracker record_alignment(AlignmentTracker t, const std::string& recommended,
                                  const std::string& executed) {
    t.total += 1;
    if (normalize_action(recommended) == normalize_action(executed)) t.matches += 1;
    return t;
}

std::string TextGradOptimizer::build_gradient_prompt(const StepRecord& outcome,
                                                     const PolicyPrompt& prompt,
                                                     const std::vector<Reflexion>& reflexions,
                                                     const TodoItem* todo) const {
    char reward_buf[32];
    std::snprintf(reward_buf, sizeof(reward_buf), "%g", outcome.reward);

    std::string p;
    p += "Current policy prompt (v" + std::to_string(prompt.version) + "):\n";
    p += prompt.text + "\n";
    p += "STEP " + std::to_string(outcome.step_index) + "\n";
    p += "STATE: " + outcome.state + "\n";
    p += "ACTION: " + outcome.action + "\n";
    p += "RESULT: " + outcome.next_state + "\n";
    p += "REWARD: " + std::string(reward_buf) + "\n";
    p += std::string("STATUS: ") + (outcome.success ? "SUCCESS" : "FAILED") + "\n\n";
    if (todo) {
        p += "CURRENT TODO: " + todo->description + " (status: " + to_string(todo->status) +
             ", attempts: " + std::to_string(todo->attempts) + ")\n\n";
    } else {
        p += "CURRENT TODO: none\n\n";
    }
    p += "PAST REFLEXIONS:\n";
    if (reflexions.empty()) {
        p += "(none)\n";
    } else {
        for (const auto& r : reflexions) {
            p += std::string("- [") + (r.success ? "SUCCESS" : "FAILED") + "] " + r.text + "\n";
        }
    }
    p += "\n";
    p += "Given the current strategy, past insights, and outcome, how should we improve?\n";
    p += "Respond with exactly these labeled lines:\n";
    p += "PATTERN HIGH: <behavior that is working>\n";
    p += "PATTERN LOW: <behavior to reduce>\n";
    p += "DIRECTION: <strategy shift>\n";
    p += "RECOMMENDED ACTION: <single next action>\n";
    p += "PROGRESS: <major_progress | partial_progress | no_progress | task_complete>\n";
    return p;
}

std::optional<TextualGradient> TextGradOptimizer::compute_gradient(
    const StepRecord& outcome, const PolicyPrompt& prompt,
    const std::vector<Reflexion>& reflexions, const TodoItem* todo) {
    const std::string p = build_gradient_prompt(outcome, prompt, reflexions, todo);
    auto first = gw_.complete(PromptRequest::make(Role::gradient, p));
    if (auto g = parse_gradient(first.text, outcome.step_index)) return g;
    const std::string reprompt =
        p + "\nReminder: the RECOMMENDED ACTION and PROGRESS lines are mandatory.\n";
    auto second = gw_.complete(PromptRequest::make(Role::gradient, reprompt));
    return parse_gradient(second.text, outcome.step_index);
}

PolicyPrompt TextGradOptimizer::merge_policy(const PolicyPrompt& prompt,
                                             const std::vector<TextualGradient>& pending) {
    if (pending.empty()) {
        throw std::invalid_argument("merge_policy requires a non-empty gradient buffer");
    }
    std::string p;
    p += "Current policy prompt (version " + std::to_string(prompt.version) + "):\n";
    p += prompt.text + "\n";
    p += "ACCUMULATED GRADIENTS:\n";
    for (const auto& g : pending) {
        p += g.raw;
        if (p.empty() || p.back() != '\n') p += '\n';
        p += "\n";
    }
    p += "Integrate these improvement signals into the policy prompt incrementally,\n";
    p += "preserving the existing guidance. Return only the full updated policy prompt "
         "text.\n";

    const int cap = 2 * token_count(prompt.text);
    auto res = gw_.complete(PromptRequest::make(Role::merge, p));
    std::string merged = res.text;
    if (token_count(merged) > cap) {
        const std::string brevity =
            p + "\nKeep the updated prompt under " + std::to_string(cap) + " words.\n";
        auto retry = gw_.complete(PromptRequest::make(Role::merge, brevity));
        merged = retry.text;
        if (token_count(merged) > cap) merged = truncate_tokens(merged, cap);
    }

    PolicyPrompt next = prompt;
    next.text = merged;
    next.version = prompt.version + 1;
    return next;
}

}  // namespace gradloop
