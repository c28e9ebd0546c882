#include "gradloop/todo.hpp"

#include "gradloop/text.hpp"

#include <algorithm>

namespace gradloop {

std::string to_string(TodoStatus s) {
    switch (s) {
        case TodoStatus::pending: return "pending";
        case TodoStatus::in_progress: return "in_progress";
        case TodoStatus::completed: return "completed";
        case TodoStatus::failed: return "failed";
    }
    throw std::logic_error("unreachable todo status");
}

namespace {

TodoStatus todo_status_from_string(const std::string& s) {
    for (TodoStatus t : {TodoStatus::pending, TodoStatus::in_progress, TodoStatus::completed,
                         TodoStatus::failed}) {
        if (to_string(t) == s) return t;
    }
    throw std::invalid_argument("unknown todo status: " + s);
}

}  // namespace

std::string to_string(ProgressSignal s) {
    switch (s) {
        case ProgressSignal::major_progress: return "major_progress";
        case ProgressSignal::partial_progress: return "partial_progress";
        case ProgressSignal::no_progress: return "no_progress";
        case ProgressSignal::task_complete: return "task_complete";
    }
    throw std::logic_error("unreachable progress signal");
}

ProgressSignal progress_from_string(const std::string& s) {
    for (ProgressSignal p : {ProgressSignal::major_progress, ProgressSignal::partial_progress,
                             ProgressSignal::no_progress, ProgressSignal::task_complete}) {
        if (to_string(p) == s) return p;
    }
    throw std::invalid_argument("unknown progress signal: " + s);
}

bool TodoList::all_completed() const {
    return std::all_of(items.begin(), items.end(),
                       [](const TodoItem& t) { return t.status == TodoStatus::completed; });
}

TodoList update_status(TodoList list, ProgressSignal signal, bool verified) {
    if (list.terminal()) return list;
    TodoItem& cur = list.items[list.cursor];
    cur.attempts += 1;

    const bool advance =
        verified &&
        (signal == ProgressSignal::major_progress || signal == ProgressSignal::task_complete);

    if (advance) {
        cur.status = TodoStatus::completed;
        if (signal == ProgressSignal::task_complete) {
            for (std::size_t i = list.cursor + 1; i < list.items.size(); ++i) {
                if (list.items[i].status == TodoStatus::pending) {
                    list.items[i].status = TodoStatus::completed;
                }
            }
            list.cursor = list.items.size();
        } else {
            list.cursor += 1;
            if (list.cursor < list.items.size()) {
                list.items[list.cursor].status = TodoStatus::in_progress;
            }
        }
        return list;
    }

    // A stuck item is failed and skipped; regression to earlier subgoals is
    // never allowed, so skipping is the only way out of a dead subgoal.
    if (cur.attempts > kMaxTodoAttempts) {
        cur.status = TodoStatus::failed;
        list.cursor += 1;
        if (list.cursor < list.items.size()) {
            list.items[list.cursor].status = TodoStatus::in_progress;
        }
    }
    return list;
}

nlohmann::json to_json(const TodoList& list) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& t : list.items) {
        items.push_back({{"id", t.id},
                         {"description", t.description},
                         {"status", to_string(t.status)},
                         {"attempts", t.attempts},
                         {"discovered_info", t.discovered_info}});
    }
    return {{"items", items}, {"cursor", list.cursor}};
}

TodoList todo_list_from_json(const nlohmann::json& j) {
    TodoList list;
    for (const auto& ij : j.at("items")) {
        TodoItem t;
        t.id = ij.at("id").get<int>();
        t.description = ij.at("description").get<std::string>();
        t.status = todo_status_from_string(ij.at("status").get<std::string>());
        t.attempts = ij.at("attempts").get<int>();
        t.discovered_info = ij.at("discovered_info").get<std::vector<std::string>>();
        list.items.push_back(std::move(t));
    }
    list.cursor = j.at("cursor").get<std::size_t>();
    return list;
}

std::string TodoPlanner::build_decompose_prompt(
    const std::string& task, const std::string& initial_state,
    const std::vector<MemoryEntry>& past_reflexions) const {
    std::string p;
    p += "TASK: " + task + "\n";
    p += "CURRENT STATE: " + initial_state + "\n\n";
    if (!past_reflexions.empty()) {
        p += "PAST REFLEXIONS FROM EARLIER TASKS:\n";
        for (const auto& m : past_reflexions) {
            p += "- " + m.insight + "\n";
        }
        p += "\n";
    }
    p += "Generate 3-8 sequential subgoals:\n";
    p += "Requirements:\n";
    p += "1. Use ACTION VERBS (what to DO)\n";
    p += "2. Keep goals HIGH-LEVEL (universal)\n";
    p += "3. Goals work in any environment\n";
    p += "4. Each achievable before moving to next\n\n";
    p += "Respond with one subgoal per line, each line starting with \"TODO:\".\n";
    return p;
}

TodoList TodoPlanner::parse_decomposition(const std::string& text) const {
    std::vector<std::string> descriptions;
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        auto pos = line.find("TODO:");
        if (pos == std::string::npos) continue;
        std::string desc = trim(line.substr(pos + 5));
        // strip leading numbering like "3." or "2)"
        std::size_t i = 0;
        while (i < desc.size() &&
               (std::isdigit(static_cast<unsigned char>(desc[i])) || desc[i] == '.' ||
                desc[i] == ')' || desc[i] == ' ')) {
            ++i;
        }
        desc = trim(desc.substr(i));
        if (desc.empty()) throw DecomposeError("empty TODO line");
        std::string head = to_lower(desc.substr(0, desc.find(' ')));
        if (head == "the" || head == "a") {
            throw DecomposeError("TODO does not start with an action verb: " + desc);
        }
        descriptions.push_back(desc);
    }
    if (descriptions.size() < 3 || descriptions.size() > 8) {
        throw DecomposeError("expected 3-8 subgoals, got " +
                             std::to_string(descriptions.size()));
    }
    TodoList list;
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
        TodoItem item;
        item.id = static_cast<int>(i);
        item.description = descriptions[i];
        item.status = i == 0 ? TodoStatus::in_progress : TodoStatus::pending;
        list.items.push_back(std::move(item));
    }
    list.cursor = 0;
    return list;
}

TodoList TodoPlanner::decompose(const std::string& task, const std::string& initial_state,
                                const std::vector<MemoryEntry>& past_reflexions) {
    const std::string prompt = build_decompose_prompt(task, initial_state, past_reflexions);
    auto first = gw_.complete(PromptRequest::make(Role::decompose, prompt));
    try {
        return parse_decomposition(first.text);
    } catch (const DecomposeError&) {
        const std::string reprompt =
            prompt +
            "\nReminder: respond with between 3 and 8 lines, each starting with \"TODO:\" "
            "followed by an action verb.\n";
        auto second = gw_.complete(PromptRequest::make(Role::decompose, reprompt));
        return parse_decomposition(second.text);  // DecomposeError propagates
    }
}

bool TodoPlanner::verify_completion(const TodoItem& todo, const std::string& prev_state,
                                    const std::string& action, const std::string& new_state) {
    if (prev_state == new_state) return false;  // nothing observably changed
    std::string p;
    p += "SUBGOAL: " + todo.description + "\n";
    p += "PREVIOUS STATE: " + prev_state + "\n";
    p += "ACTION TAKEN: " + action + "\n";
    p += "NEW STATE: " + new_state + "\n\n";
    p += "Was the subgoal observably achieved? Answer exactly YES or NO on the first line.\n";
    auto res = gw_.complete(PromptRequest::make(Role::todo_verify, p));
    return to_lower(first_nonempty_line(res.text)) == "yes";
}

}  // namespace gradloop
