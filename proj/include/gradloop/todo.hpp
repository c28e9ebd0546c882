#pragma once

#include "gradloop/gateway.hpp"
#include "gradloop/memory_types.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace gradloop {

enum class TodoStatus { pending, in_progress, completed, failed };

std::string to_string(TodoStatus s);

struct TodoItem {
    int id = 0;
    std::string description;
    TodoStatus status = TodoStatus::pending;
    int attempts = 0;
    std::vector<std::string> discovered_info;
};

enum class ProgressSignal { major_progress, partial_progress, no_progress, task_complete };

std::string to_string(ProgressSignal s);
ProgressSignal progress_from_string(const std::string& s);  // throws std::invalid_argument

// Sequential subgoals with a monotone cursor. cursor indexes the unique
// in_progress item; cursor == items.size() once no pending work remains.
struct TodoList {
    std::vector<TodoItem> items;
    std::size_t cursor = 0;

    const TodoItem* current() const {
        return cursor < items.size() ? &items[cursor] : nullptr;
    }
    bool terminal() const { return cursor >= items.size(); }
    bool all_completed() const;
};

// An item stuck past this many attempts is marked failed and skipped; the
// cursor never moves backward (≈ horizon/3).
inline constexpr int kMaxTodoAttempts = 8;

// Dual-verified lifecycle step: the current item advances to completed only
// when the progress signal says major_progress/task_complete AND the
// semantic verification agreed. task_complete completes all remaining
// pending items. Attempts on the current item increment on every call.
TodoList update_status(TodoList list, ProgressSignal signal, bool verified);

nlohmann::json to_json(const TodoList& list);
TodoList todo_list_from_json(const nlohmann::json& j);

class DecomposeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TodoPlanner {
public:
    explicit TodoPlanner(Gateway& gateway) : gw_(gateway) {}

    // Zero-shot decomposition into 3-8 sequential subgoals; the first item
    // starts in_progress. One reprompt on unparsable output, then
    // DecomposeError. past_reflexions, when non-empty, are included in the
    // prompt so earlier trials shape the plan.
    TodoList decompose(const std::string& task, const std::string& initial_state,
                       const std::vector<MemoryEntry>& past_reflexions);

    // Lightweight yes/no check that the subgoal is observably achieved.
    // Unparsable output is a conservative "no"; an unchanged state short-
    // circuits to false without a model call.
    bool verify_completion(const TodoItem& todo, const std::string& prev_state,
                           const std::string& action, const std::string& new_state);

    std::string build_decompose_prompt(const std::string& task, const std::string& initial_state,
                                       const std::vector<MemoryEntry>& past_reflexions) const;

private:
    TodoList parse_decomposition(const std::string& text) const;

    Gateway& gw_;
};

}  // namespace gradloop
