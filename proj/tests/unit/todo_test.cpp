#include "gradloop/gateway.hpp"
#include "gradloop/todo.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace gradloop;
using gradloop::testing::LambdaBackend;

namespace {

TodoList fresh_list(int n) {
    TodoList list;
    for (int i = 0; i < n; ++i) {
        TodoItem t;
        t.id = i;
        t.description = "Do thing " + std::to_string(i);
        t.status = i == 0 ? TodoStatus::in_progress : TodoStatus::pending;
        list.items.push_back(t);
    }
    list.cursor = 0;
    return list;
}

}  // namespace

TEST_CASE("decompose yields the six cool-pan subgoals, first in progress") {
    Gateway gw(gradloop::testing::shipped_backend());
    TodoPlanner planner(gw);
    auto list = planner.decompose("cool some pan and put it in countertop",
                                  "You are in the middle of a room...", {});
    REQUIRE(list.items.size() == 6);
    CHECK(list.items[0].description == "Locate the pan");
    CHECK(list.items[1].description == "Pick up the pan");
    CHECK(list.items[2].description == "Find a cooling method");
    CHECK(list.items[3].description == "Cool the pan");
    CHECK(list.items[4].description == "Find the countertop");
    CHECK(list.items[5].description == "Place pan on countertop");
    CHECK(list.items[0].status == TodoStatus::in_progress);
    for (std::size_t i = 1; i < list.items.size(); ++i) {
        CHECK(list.items[i].status == TodoStatus::pending);
    }
    CHECK(list.cursor == 0);
}

TEST_CASE("decompose includes past reflexions in the prompt when present") {
    std::string seen;
    Gateway gw(std::make_shared<LambdaBackend>([&](const PromptRequest& r) {
        seen = r.prompt_text;
        return CompletionResult{"TODO: Find it\nTODO: Grab it\nTODO: Deliver it", "lambda", false,
                                0};
    }));
    TodoPlanner planner(gw);

    planner.decompose("task", "state", {});
    CHECK(seen.find("PAST REFLEXIONS") == std::string::npos);

    MemoryEntry m;
    m.source_task = "earlier task";
    m.insight = "Containers must be opened before use.";
    planner.decompose("task", "state", {m});
    CHECK(seen.find("PAST REFLEXIONS") != std::string::npos);
    CHECK(seen.find("Containers must be opened before use.") != std::string::npos);
}

TEST_CASE("decompose reprompts once, then fails") {
    // two subgoals violate the 3-8 bound on both attempts
    std::vector<ScriptedRule> two_lines{
        {Role::decompose, {}, std::nullopt, "TODO: Only one\nTODO: And two"}};
    Gateway gw_bad(std::make_shared<ScriptedBackend>(two_lines));
    TodoPlanner bad(gw_bad);
    CHECK_THROWS_AS(bad.decompose("task", "state", {}), DecomposeError);
    CHECK(gw_bad.call_log().size() == 2);

    // parse succeeds on the reprompt
    std::vector<ScriptedRule> fixed_on_retry{
        {Role::decompose, {"Reminder:"}, std::nullopt, "TODO: One\nTODO: Two\nTODO: Three"},
        {Role::decompose, {}, std::nullopt, "no subgoals at all"}};
    Gateway gw_retry(std::make_shared<ScriptedBackend>(fixed_on_retry));
    TodoPlanner retry(gw_retry);
    auto list = retry.decompose("task", "state", {});
    CHECK(list.items.size() == 3);
    CHECK(gw_retry.call_log().size() == 2);
}

TEST_CASE("decompose strips numbering and rejects non-verb leads") {
    std::vector<ScriptedRule> numbered{
        {Role::decompose, {}, std::nullopt, "1. TODO: Locate the pan\n2. TODO: 2. Pick it up\nTODO: Deliver it"}};
    Gateway gw(std::make_shared<ScriptedBackend>(numbered));
    TodoPlanner planner(gw);
    auto list = planner.decompose("task", "state", {});
    REQUIRE(list.items.size() == 3);
    CHECK(list.items[0].description == "Locate the pan");
    CHECK(list.items[1].description == "Pick it up");

    std::vector<ScriptedRule> article{
        {Role::decompose, {}, std::nullopt, "TODO: The pan\nTODO: Find it\nTODO: Cool it"}};
    Gateway gw2(std::make_shared<ScriptedBackend>(article));
    TodoPlanner planner2(gw2);
    CHECK_THROWS_AS(planner2.decompose("task", "state", {}), DecomposeError);
}

TEST_CASE("verify_completion answers from the lightweight check") {
    std::vector<ScriptedRule> rules{
        {Role::todo_verify, {"SUBGOAL: Open the fridge", "NEW STATE: fridge is open"},
         std::nullopt, "YES"},
        {Role::todo_verify, {"SUBGOAL: Garbled"}, std::nullopt, "maybe?"},
        {Role::todo_verify, {}, std::nullopt, "NO"}};
    Gateway gw(std::make_shared<ScriptedBackend>(rules));
    TodoPlanner planner(gw);

    TodoItem open_fridge{0, "Open the fridge", TodoStatus::in_progress, 0, {}};
    CHECK(planner.verify_completion(open_fridge, "fridge is closed", "open fridge 1",
                                    "fridge is open"));
    CHECK(!planner.verify_completion(open_fridge, "fridge is closed", "look",
                                     "still closed"));

    // unparsable replies are a conservative no
    TodoItem garbled{1, "Garbled", TodoStatus::in_progress, 0, {}};
    CHECK(!planner.verify_completion(garbled, "a", "act", "b"));

    // an unchanged state short-circuits without a model call
    auto calls_before = gw.call_log().size();
    CHECK(!planner.verify_completion(open_fridge, "same text", "look", "same text"));
    CHECK(gw.call_log().size() == calls_before);
}

TEST_CASE("update_status transition table") {
    auto list = fresh_list(6);

    SUBCASE("advance needs both signals") {
        auto next = update_status(list, ProgressSignal::major_progress, true);
        CHECK(next.items[0].status == TodoStatus::completed);
        CHECK(next.items[1].status == TodoStatus::in_progress);
        CHECK(next.cursor == 1);
        CHECK(next.items[0].attempts == 1);
    }
    SUBCASE("unverified major progress does not advance") {
        auto next = update_status(list, ProgressSignal::major_progress, false);
        CHECK(next.items[0].status == TodoStatus::in_progress);
        CHECK(next.cursor == 0);
        CHECK(next.items[0].attempts == 1);
    }
    SUBCASE("verified partial or no progress never advances") {
        for (auto s : {ProgressSignal::partial_progress, ProgressSignal::no_progress}) {
            auto next = update_status(list, s, true);
            CHECK(next.cursor == 0);
            CHECK(next.items[0].status == TodoStatus::in_progress);
        }
    }
    SUBCASE("task_complete at cursor 4 completes items 4 and 5") {
        // walk the cursor to item 4
        for (int i = 0; i < 4; ++i) list = update_status(list, ProgressSignal::major_progress, true);
        REQUIRE(list.cursor == 4);
        auto next = update_status(list, ProgressSignal::task_complete, true);
        CHECK(next.items[4].status == TodoStatus::completed);
        CHECK(next.items[5].status == TodoStatus::completed);
        CHECK(next.terminal());
        CHECK(next.all_completed());
    }
    SUBCASE("a stuck item fails and is skipped, never revisited") {
        TodoList cur = list;
        for (int i = 0; i <= kMaxTodoAttempts; ++i) {
            cur = update_status(cur, ProgressSignal::no_progress, false);
        }
        CHECK(cur.items[0].status == TodoStatus::failed);
        CHECK(cur.items[0].attempts == kMaxTodoAttempts + 1);
        CHECK(cur.items[1].status == TodoStatus::in_progress);
        CHECK(cur.cursor == 1);
    }
    SUBCASE("updates on a terminal list are no-ops") {
        TodoList cur = list;
        for (int i = 0; i < 6; ++i) cur = update_status(cur, ProgressSignal::major_progress, true);
        CHECK(cur.terminal());
        auto again = update_status(cur, ProgressSignal::major_progress, true);
        CHECK(to_json(again).dump() == to_json(cur).dump());
    }
}

TEST_CASE("todo lifecycle properties over random updates") {
    std::mt19937 rng(123);
    auto signals = {ProgressSignal::major_progress, ProgressSignal::partial_progress,
                    ProgressSignal::no_progress, ProgressSignal::task_complete};
    std::vector<ProgressSignal> sig_vec(signals);

    for (int trial = 0; trial < 2000; ++trial) {
        int n = 3 + static_cast<int>(rng() % 6);
        TodoList list = fresh_list(n);
        std::vector<TodoStatus> prev_status(n, TodoStatus::pending);
        prev_status[0] = TodoStatus::in_progress;
        std::vector<int> updates_while_current(n, 0);

        int steps = static_cast<int>(rng() % 40);
        for (int s = 0; s < steps; ++s) {
            if (!list.terminal()) updates_while_current[list.cursor] += 1;
            list = update_status(list, sig_vec[rng() % sig_vec.size()], rng() % 2 == 0);

            int in_progress = 0;
            for (int i = 0; i < n; ++i) {
                TodoStatus now = list.items[i].status;
                TodoStatus before = prev_status[i];
                // completed is absorbing; nothing moves backward
                if (before == TodoStatus::completed) CHECK(now == TodoStatus::completed);
                if (before == TodoStatus::failed) CHECK(now == TodoStatus::failed);
                if (now == TodoStatus::in_progress) in_progress += 1;
                prev_status[i] = now;
            }
            if (!list.terminal()) {
                CHECK(in_progress == 1);
            } else {
                CHECK(in_progress == 0);
            }
            // attempts count the updates received while in progress
            for (int i = 0; i < n; ++i) CHECK(list.items[i].attempts == updates_while_current[i]);
        }
    }
}

TEST_CASE("todo list json round trip") {
    auto list = fresh_list(4);
    list = update_status(list, ProgressSignal::major_progress, true);
    list.items[1].discovered_info.push_back("saw a pan at stoveburner 2");
    auto j = to_json(list);
    auto back = todo_list_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.cursor == 1);
    CHECK(back.items[1].discovered_info.size() == 1);
}
