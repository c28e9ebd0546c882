#include "gradloop/reflexion.hpp"
#include "gradloop/text.hpp"
#include "gradloop/textgrad.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace gradloop;
using gradloop::testing::LambdaBackend;

namespace {

bool fields_equal(const TextualGradient& a, const TextualGradient& b) {
    return a.step_index == b.step_index && a.pattern_high == b.pattern_high &&
           a.pattern_low == b.pattern_low && a.direction == b.direction &&
           a.recommended_action == b.recommended_action && a.progress == b.progress;
}

}  // namespace

TEST_CASE("initial policy prompt carries the six guidance components verbatim") {
    auto p = PolicyPrompt::initial();
    CHECK(p.version == 0);
    CHECK(p.component_tags.size() == 6);
    CHECK(p.text.find("Observe and learn the environment's rules through interaction") !=
          std::string::npos);
    CHECK(p.text.find("Try different action formats to discover what works") != std::string::npos);
    CHECK(p.text.find("Identify patterns in successes and failures") != std::string::npos);
    CHECK(p.text.find("Form and test hypotheses about environment constraints") !=
          std::string::npos);
    CHECK(p.text.find("Adapt behavior based on discovered patterns") != std::string::npos);
    CHECK(p.text.find("Analyze the task to identify required objects and locations") !=
          std::string::npos);
}

TEST_CASE("gradient parser inverts the formatter") {
    std::mt19937 rng(11);
    const std::vector<std::string> snippets = {
        "targeted navigation", "check container states",   "go to stoveburner 1",
        "open fridge 1",       "verify object identity",   "systematic sweep",
        "",                    "prefer informative moves", "take pan 1"};
    auto any = [&](bool allow_empty) {
        std::string s = snippets[rng() % snippets.size()];
        while (!allow_empty && s.empty()) s = snippets[rng() % snippets.size()];
        return s;
    };
    const std::vector<ProgressSignal> progress = {
        ProgressSignal::major_progress, ProgressSignal::partial_progress,
        ProgressSignal::no_progress, ProgressSignal::task_complete};

    for (int i = 0; i < 1000; ++i) {
        TextualGradient g;
        g.step_index = static_cast<int>(rng() % 30);
        g.pattern_high = any(true);
        g.pattern_low = any(true);
        g.direction = any(true);
        g.recommended_action = any(false);
        g.progress = progress[rng() % progress.size()];

        auto parsed = parse_gradient(format_gradient(g), g.step_index);
        REQUIRE(parsed.has_value());
        CHECK(fields_equal(*parsed, g));
        CHECK(parsed->raw == format_gradient(g));
    }
}

TEST_CASE("parser tolerates missing patterns but not missing mandatory fields") {
    auto ok = parse_gradient("RECOMMENDED ACTION: go to fridge 1\nPROGRESS: no_progress", 3);
    REQUIRE(ok.has_value());
    CHECK(ok->pattern_high.empty());
    CHECK(ok->direction.empty());
    CHECK(ok->recommended_action == "go to fridge 1");

    CHECK(!parse_gradient("PROGRESS: no_progress", 0).has_value());
    CHECK(!parse_gradient("RECOMMENDED ACTION: look", 0).has_value());
    CHECK(!parse_gradient("RECOMMENDED ACTION: look\nPROGRESS: sideways", 0).has_value());
    CHECK(!parse_gradient("RECOMMENDED ACTION:\nPROGRESS: no_progress", 0).has_value());
    // progress casing is forgiven
    CHECK(parse_gradient("RECOMMENDED ACTION: look\nPROGRESS: Task_Complete", 0).has_value());
}

TEST_CASE("passive look gradient from the shipped rules") {
    Gateway gw(gradloop::testing::shipped_backend());
    TextGradOptimizer tg(gw);
    auto policy = PolicyPrompt::initial();
    StepRecord rec = make_step_record(
        0, "You are in the middle of a room.", "look", 0.0,
        "You are in the middle of a room. Looking quickly around you, you see a cabinet 1.");
    auto g = tg.compute_gradient(rec, policy, {}, nullptr);
    REQUIRE(g.has_value());
    CHECK(g->direction.find("from passive looking to targeted navigation") != std::string::npos);
    CHECK(g->recommended_action == "go to stoveburner 1");
    CHECK(g->progress == ProgressSignal::no_progress);
    CHECK(g->pattern_low.find("Passive observation") != std::string::npos);
}

TEST_CASE("gradient prompt carries the outcome, todo status, and all prior reflexions") {
    std::string seen;
    Gateway gw(std::make_shared<LambdaBackend>([&](const PromptRequest& r) {
        seen = r.prompt_text;
        return CompletionResult{"RECOMMENDED ACTION: look\nPROGRESS: no_progress", "lambda",
                                false, 0};
    }));
    TextGradOptimizer tg(gw);
    std::vector<Reflexion> reflexions;
    for (int i = 0; i < 4; ++i) {
        Reflexion r;
        r.step_index = i;
        r.text = "insight number " + std::to_string(i);
        r.success = i % 2 == 0;
        reflexions.push_back(r);
    }
    TodoItem todo{2, "Find a cooling method", TodoStatus::in_progress, 3, {}};
    StepRecord rec = make_step_record(4, "at sink", "clean pan 1 with sinkbasin 1", 0.0,
                                      "You clean the pan 1 using the sinkbasin 1.");
    auto g = tg.compute_gradient(rec, PolicyPrompt::initial(), reflexions, &todo);
    REQUIRE(g.has_value());
    for (int i = 0; i < 4; ++i) {
        CHECK(seen.find("insight number " + std::to_string(i)) != std::string::npos);
    }
    CHECK(seen.find("CURRENT TODO: Find a cooling method (status: in_progress, attempts: 3)") !=
          std::string::npos);
    CHECK(seen.find("RESULT: You clean the pan 1 using the sinkbasin 1.") != std::string::npos);
    CHECK(seen.find("REWARD: 0") != std::string::npos);
    CHECK(seen.find("Given the current strategy, past insights, and outcome, how should we "
                    "improve?") != std::string::npos);
}

TEST_CASE("unparsable gradient is reprompted once, then discarded") {
    int calls = 0;
    Gateway gw(std::make_shared<LambdaBackend>([&](const PromptRequest&) {
        calls += 1;
        return CompletionResult{"no labels here", "lambda", false, 0};
    }));
    TextGradOptimizer tg(gw);
    auto g = tg.compute_gradient(make_step_record(0, "s", "a", 0.0, "o"), PolicyPrompt::initial(),
                                 {}, nullptr);
    CHECK(!g.has_value());
    CHECK(calls == 2);
}

TEST_CASE("merge integrates gradients and bumps the version") {
    Gateway gw(gradloop::testing::shipped_backend());
    TextGradOptimizer tg(gw);
    auto policy = PolicyPrompt::initial();

    TextualGradient g;
    g.step_index = 2;
    g.pattern_low = "took the wrong object (pot is not pan)";
    g.direction = "verify identity first";
    g.recommended_action = "go to stoveburner 2";
    g.progress = ProgressSignal::no_progress;
    g.raw = format_gradient(g) + "NOTE: wrong object taken\n";

    auto merged = tg.merge_policy(policy, {g});
    CHECK(merged.version == 1);
    CHECK(merged.text.find("Verify object identity before taking") != std::string::npos);

    auto merged2 = tg.merge_policy(merged, {g});
    CHECK(merged2.version == 2);

    CHECK_THROWS_AS(tg.merge_policy(policy, {}), std::invalid_argument);
}

TEST_CASE("merge failure propagates so the caller can retain its buffer") {
    Gateway gw(std::make_shared<LambdaBackend>([](const PromptRequest&) -> CompletionResult {
        throw GatewayError(GatewayErrorKind::transport, "down");
    }));
    TextGradOptimizer tg(gw);
    TextualGradient g;
    g.recommended_action = "look";
    g.raw = format_gradient(g);
    CHECK_THROWS_AS(tg.merge_policy(PolicyPrompt::initial(), {g}), GatewayError);
}

TEST_CASE("merged text is held to twice the original token count") {
    std::string huge;
    for (int i = 0; i < 600; ++i) huge += "filler ";
    int calls = 0;
    Gateway gw(std::make_shared<LambdaBackend>([&](const PromptRequest& r) {
        calls += 1;
        if (r.prompt_text.find("Keep the updated prompt under") != std::string::npos) {
            return CompletionResult{"short merged policy text", "lambda", false, 0};
        }
        return CompletionResult{huge, "lambda", false, 0};
    }));
    TextGradOptimizer tg(gw);
    auto policy = PolicyPrompt::initial();
    TextualGradient g;
    g.recommended_action = "look";
    g.raw = format_gradient(g);

    auto merged = tg.merge_policy(policy, {g});
    CHECK(calls == 2);  // brevity re-request happened
    CHECK(merged.text == "short merged policy text");

    // both attempts too long: hard truncation enforces the cap
    Gateway gw2(std::make_shared<LambdaBackend>(
        [&](const PromptRequest&) { return CompletionResult{huge, "lambda", false, 0}; }));
    TextGradOptimizer tg2(gw2);
    auto truncated = tg2.merge_policy(policy, {g});
    CHECK(token_count(truncated.text) <= 2 * token_count(policy.text));
}

TEST_CASE("alignment accounting") {
    AlignmentTracker t;
    for (int i = 0; i < 23; ++i) t = record_alignment(t, "go to fridge 1", "go to fridge 1");
    CHECK(t.matches == 23);
    CHECK(t.total == 23);
    CHECK(t.ratio() == doctest::Approx(1.0));

    AlignmentTracker n;
    n = record_alignment(n, "go to fridge 1", "Go to fridge 1 ");
    CHECK(n.matches == 1);  // normalization identity
    n = record_alignment(n, "open fridge 1", "go to fridge 1");
    CHECK(n.matches == 1);
    CHECK(n.total == 2);
}
