#include "gradloop/orchestrator.hpp"

#include "gradloop/text.hpp"

#include <chrono>
#include <fstream>

namespace gradloop {

std::string to_string(const AgentMode& m) {
    if (m.use_reflexion && m.use_textgrad) return m.bidirectional_coupling ? "full" : "sequential";
    if (m.use_reflexion) return "reflexion_only";
    if (m.use_textgrad) return "textgrad_only";
    return "none";
}

AgentMode agent_mode_from_string(const std::string& s) {
    if (s == "full") return AgentMode::full();
    if (s == "reflexion_only") return AgentMode::reflexion_only();
    if (s == "textgrad_only") return AgentMode::textgrad_only();
    if (s == "sequential") return AgentMode::sequential();
    throw std::invalid_argument("unknown agent mode: " + s);
}

TrialResult aggregate_trial(int trial_index, std::vector<EpisodeResult> episodes) {
    TrialResult t;
    t.trial_index = trial_index;
    int successes = 0;
    long steps = 0;
    for (const auto& e : episodes) {
        if (e.success) successes += 1;
        steps += e.steps_taken;
        t.total_loops += e.loop_count;
        t.alignment_matches += e.alignment_numerator;
        t.alignment_total += e.alignment_denominator;
    }
    const auto n = episodes.size();
    t.success_rate = n ? static_cast<double>(successes) / static_cast<double>(n) : 0.0;
    t.mean_steps = n ? static_cast<double>(steps) / static_cast<double>(n) : 0.0;
    t.episodes = std::move(episodes);
    return t;
}

nlohmann::json to_json(const TextualGradient& g) {
    return {{"step_index", g.step_index},
            {"pattern_high", g.pattern_high},
            {"pattern_low", g.pattern_low},
            {"direction", g.direction},
            {"recommended_action", g.recommended_action},
            {"progress", to_string(g.progress)},
            {"raw", g.raw}};
}

nlohmann::json to_json(const Reflexion& r) {
    return {{"step_index", r.step_index}, {"text", r.text},
            {"success", r.success},       {"action", r.action},
            {"observation", r.observation}, {"created_at", to_iso8601(r.created_at)}};
}

nlohmann::json to_json(const EpisodeTrace& t) {
    nlohmann::json retrieved = nlohmann::json::array();
    for (const auto& m : t.retrieved) retrieved.push_back(to_json(m));
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.steps) {
        nlohmann::json sj = {{"record", to_json(s.record)},
                             {"todos", s.todos},
                             {"policy_version", s.policy_version},
                             {"merged", s.merged}};
        sj["gradient"] = s.gradient ? to_json(*s.gradient) : nlohmann::json(nullptr);
        sj["reflexion"] = s.reflexion ? to_json(*s.reflexion) : nlohmann::json(nullptr);
        steps.push_back(std::move(sj));
    }
    nlohmann::json versions = nlohmann::json::array();
    for (const auto& v : t.policy_history) {
        versions.push_back(
            {{"version", v.version}, {"step_index", v.step_index}, {"text", v.text}});
    }
    return {{"env", to_json(t.env)},
            {"trial_index", t.trial_index},
            {"decomposition", t.decomposition},
            {"retrieved", retrieved},
            {"steps", steps},
            {"policy_history", versions},
            {"final_merge", t.final_merge},
            {"final_policy_version", t.final_policy_version},
            {"result", to_json(t.result)}};
}

Orchestrator::Orchestrator(Gateway& gw, SimClock& clock, OrchestratorOptions opts)
    : gw_(gw),
      clock_(clock),
      opts_(std::move(opts)),
      planner_(gw),
      reflexion_engine_(gw, clock),
      optimizer_(gw) {}

std::string Orchestrator::select_action(const PolicyPrompt& policy, const std::string& state,
                                        const std::vector<MemoryEntry>& memories,
                                        const TodoItem* todo) {
    std::string p = policy.text + "\n";
    if (!memories.empty()) {
        p += "\nRETRIEVED MEMORIES:\n";
        for (const auto& m : memories) {
            p += "- [from: " + m.source_task + "] " + m.insight + "\n";
        }
    }
    p += "\nCURRENT TODO: " + (todo ? todo->description : std::string("none")) + "\n";
    p += "\nCURRENT STATE: " + state + "\n";
    p += "\nNext action:\n";

    auto first = gw_.complete(PromptRequest::make(Role::action_selection, p));
    std::string action = first_nonempty_line(first.text);
    if (!action.empty()) return action;
    auto second = gw_.complete(PromptRequest::make(
        Role::action_selection, p + "\nRespond with a single action command on one line.\n"));
    action = first_nonempty_line(second.text);
    return action.empty() ? "look" : action;
}

EpisodeResult Orchestrator::run_episode(const EnvSpec& spec, TextEnv& env,
                                        ConsolidatedStore& store, EpisodicArchive& archive,
                                        int trial_index, EpisodeTrace* trace) {
    const EpisodeConfig& cfg = opts_.cfg;
    const AgentMode& mode = opts_.mode;

    EpisodeResult result;
    result.env = spec;
    result.trial_index = trial_index;
    if (trace) {
        trace->env = spec;
        trace->trial_index = trial_index;
    }

    std::string obs = env.reset();

    // Init stage 1: decomposition. Strength-eligible memories give the
    // planner its past-trial context; the LLM retrieval below is a separate,
    // later call so the call order stays decompose -> retrieve.
    std::vector<MemoryEntry> planner_context;
    if (mode.use_reflexion) {
        auto cands = strength_candidates(store, clock_.now(), cfg.strength_threshold,
                                         cfg.decay_rate_per_hour);
        for (int i = 0; i < cfg.retrieve_top_k && i < static_cast<int>(cands.size()); ++i) {
            planner_context.push_back(cands[i]);
        }
    }
    TodoList todos;
    try {
        todos = planner_.decompose(spec.task_description, obs, planner_context);
    } catch (const DecomposeError&) {
        result.success = false;
        result.steps_taken = 0;
        return result;  // decomposition error: the episode is a failure, not a crash
    }
    if (trace) trace->decomposition = to_json(todos);

    // Init stage 2: LLM-based semantic retrieval.
    std::vector<MemoryEntry> memories;
    if (mode.use_reflexion) {
        auto rr = retrieve(gw_, store, spec.task_description, obs, cfg.retrieve_top_k,
                           clock_.now(), cfg.strength_threshold, cfg.decay_rate_per_hour);
        memories = std::move(rr.entries);
        if (trace) trace->retrieved = memories;
    }

    PolicyPrompt policy = PolicyPrompt::initial();
    std::vector<Reflexion> working;
    std::vector<TextualGradient> gradient_history;
    std::vector<TextualGradient> pending;
    AlignmentTracker tracker;
    std::optional<TextualGradient> prev_gradient;

    bool done = false;
    bool success = false;
    int steps = 0;
    for (int i = 0; i < cfg.horizon && !done; ++i) {
        const TodoItem* cur = todos.current();
        std::optional<int> cur_id = cur ? std::optional<int>(cur->id) : std::nullopt;

        // (3) action selection, (4) execution
        const std::string action = select_action(policy, obs, memories, cur);
        StepOutcome out = env.step(action);
        StepRecord rec = make_step_record(i, obs, action, out.reward, out.observation, cur_id);

        if (prev_gradient) {
            tracker = record_alignment(tracker, prev_gradient->recommended_action, action);
        }

        // (5) gradient immediately after execution, over all prior reflexions
        std::optional<TextualGradient> grad;
        if (mode.use_textgrad) {
            grad = optimizer_.compute_gradient(rec, policy, working, cur);
            if (grad) {
                pending.push_back(*grad);
                gradient_history.push_back(*grad);
            }
        }

        // (6) reflexion when triggered; gradients flow in only under
        // bidirectional coupling, and only from steps before this one
        std::optional<Reflexion> refl;
        if (mode.use_reflexion && should_reflect(i, rec, cfg)) {
            std::vector<TextualGradient> prior_gradients;
            if (mode.use_textgrad && mode.bidirectional_coupling) {
                for (const auto& g : gradient_history) {
                    if (g.step_index < i) prior_gradients.push_back(g);
                }
            }
            HistoryContext hist = build_history_context(working, cfg.history_window_k);
            refl = reflexion_engine_.generate(rec, hist, prior_gradients, cur);
            if (refl) working.push_back(*refl);
        }

        // (7) dual-verified TODO update; without a coupled gradient the
        // progress leg falls back to the verification outcome
        if (!todos.terminal()) {
            bool verified = planner_.verify_completion(*todos.current(), obs, action,
                                                       out.observation);
            if (verified) {
                todos.items[todos.cursor].discovered_info.push_back(out.observation);
            }
            ProgressSignal signal;
            if (grad && mode.bidirectional_coupling) {
                signal = grad->progress;
            } else {
                signal = verified ? ProgressSignal::major_progress : ProgressSignal::no_progress;
            }
            todos = update_status(todos, signal, verified);
        }

        // merge once the accumulation window fills
        bool merged_now = false;
        if (mode.use_textgrad && static_cast<int>(pending.size()) >= cfg.merge_every) {
            try {
                policy = optimizer_.merge_policy(policy, pending);
                pending.clear();
                merged_now = true;
                if (trace) trace->policy_history.push_back({policy.version, i, policy.text});
            } catch (const GatewayError&) {
                // prompt unchanged, buffer retained
            }
        }

        if (trace) {
            trace->steps.push_back(
                {rec, to_json(todos), grad, refl, policy.version, merged_now});
        }
        result.trace.push_back(rec);
        if (rec.success) success = true;
        obs = out.observation;
        done = out.done;
        steps = i + 1;
        prev_gradient = grad;
        clock_.advance(opts_.clock_step_seconds);
    }

    // episode end: consolidate working memory, decay/prune, flush the merge
    if (mode.use_reflexion) {
        consolidate_episode(gw_, store, archive, working, spec.task_description, clock_.now(),
                            opts_.compression);
    }
    store = decay_and_prune(store, clock_.now(), cfg.prune_below, cfg.decay_rate_per_hour);
    bool final_merge = false;
    if (mode.use_textgrad && !pending.empty()) {
        try {
            policy = optimizer_.merge_policy(policy, pending);
            pending.clear();
            final_merge = true;
            if (trace) trace->policy_history.push_back({policy.version, -1, policy.text});
        } catch (const GatewayError&) {
        }
    }

    result.success = success;
    result.steps_taken = steps;
    result.loop_count = loop_count(result.trace);
    result.alignment_numerator = tracker.matches;
    result.alignment_denominator = tracker.total;
    if (trace) {
        trace->final_merge = final_merge;
        trace->final_policy_version = policy.version;
        trace->result = result;
    }
    return result;
}

std::vector<EnvSpec> default_benchmark_envs(int horizon) {
    std::vector<EnvSpec> envs;
    auto add = [&](TaskFamily f, int seed) {
        EnvSpec s;
        s.task_family = f;
        s.seed = seed;
        s.horizon = horizon;
        s.task_description = Microworld::default_task_description(f);
        envs.push_back(std::move(s));
    };
    // look seed 2 hides its target in a closed drawer and is only solvable
    // with a container-opening insight; it must run before any environment
    // that can produce one, since the store also accumulates within a trial
    add(TaskFamily::look_at_obj_in_light, 2);
    add(TaskFamily::look_at_obj_in_light, 0);
    add(TaskFamily::look_at_obj_in_light, 1);
    add(TaskFamily::pick_two_obj_and_place, 0);
    add(TaskFamily::pick_two_obj_and_place, 1);
    add(TaskFamily::pick_two_obj_and_place, 2);
    add(TaskFamily::pick_cool_then_place, 0);
    add(TaskFamily::pick_cool_then_place, 1);
    add(TaskFamily::pick_cool_then_place, 2);
    return envs;
}

namespace {

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace

nlohmann::json metrics_to_json(const std::vector<TrialResult>& trials,
                               const BenchmarkOptions& opts) {
    nlohmann::json tj = nlohmann::json::array();
    for (const auto& t : trials) {
        nlohmann::json episodes = nlohmann::json::array();
        for (const auto& e : t.episodes) {
            episodes.push_back({{"task_family", to_string(e.env.task_family)},
                                {"seed", e.env.seed},
                                {"task_description", e.env.task_description},
                                {"success", e.success},
                                {"steps_taken", e.steps_taken},
                                {"loop_count", e.loop_count},
                                {"alignment_numerator", e.alignment_numerator},
                                {"alignment_denominator", e.alignment_denominator}});
        }
        nlohmann::json row = {{"trial_index", t.trial_index},
                              {"success_rate", t.success_rate},
                              {"mean_steps", t.mean_steps},
                              {"total_loops", t.total_loops},
                              {"alignment_matches", t.alignment_matches},
                              {"alignment_total", t.alignment_total},
                              {"episodes", episodes}};
        row["alignment"] =
            t.alignment_total == 0 ? nlohmann::json(nullptr) : nlohmann::json(t.alignment());
        tj.push_back(std::move(row));
    }
    return {{"mode", to_string(opts.orchestrator.mode)},
            {"compression", to_string(opts.orchestrator.compression)},
            {"trials", tj}};
}

std::vector<TrialResult> run_benchmark(Gateway& gw, SimClock& clock, const BenchmarkOptions& opts,
                                       const std::filesystem::path& run_dir) {
    if (opts.envs.empty()) throw std::invalid_argument("benchmark needs at least one env");
    std::error_code ec;
    std::filesystem::create_directories(run_dir / "traces", ec);
    std::filesystem::create_directories(run_dir / "sessions", ec);
    if (ec) throw std::runtime_error("cannot create run directory: " + run_dir.string());

    // manifest + config snapshot, before the first episode
    nlohmann::json envs_json = nlohmann::json::array();
    for (const auto& e : opts.envs) envs_json.push_back(to_json(e));
    nlohmann::json config_snapshot = {
        {"episode", to_json(opts.orchestrator.cfg)},
        {"mode", to_string(opts.orchestrator.mode)},
        {"compression", to_string(opts.orchestrator.compression)},
        {"clock_step_seconds", opts.orchestrator.clock_step_seconds},
        {"trials", opts.trials},
        {"envs", envs_json}};
    write_json_file(run_dir / "config.json", config_snapshot);
    write_json_file(run_dir / "manifest.json",
                    {{"schema_version", 1},
                     {"backend", opts.backend_descriptor.empty() ? gw.backend_id()
                                                                 : opts.backend_descriptor},
                     {"build", "gradloop 0.1.0"},
                     {"config", config_snapshot},
                     {"trials", opts.trials},
                     {"mode", to_string(opts.orchestrator.mode)},
                     {"envs", envs_json},
                     {"started_at", to_iso8601(SystemClock().now())}});

    const auto t_start = std::chrono::steady_clock::now();
    std::vector<TrialResult> trials;
    nlohmann::json trial_timings = nlohmann::json::array();
    for (int t = 0; t < opts.trials; ++t) {
        const auto trial_start = std::chrono::steady_clock::now();
        // Trial 0 is zero-shot by construction: a fresh store, never loaded
        // from disk. Later trials read what their predecessor persisted.
        ConsolidatedStore store;
        EpisodicArchive archive;
        if (t > 0) {
            store = load_store(run_dir / "store.json");
            archive = EpisodicArchive::load(run_dir / "archive.ndjson");
        }

        Orchestrator orch(gw, clock, opts.orchestrator);
        std::vector<EpisodeResult> episodes;
        for (std::size_t i = 0; i < opts.envs.size(); ++i) {
            const std::string tag = "trial" + std::to_string(t) + "_env" + std::to_string(i);
            if (opts.record_sessions) {
                gw.start_recording(run_dir / "sessions" / (tag + ".ndjson"), clock);
            }
            Microworld env(opts.envs[i]);
            EpisodeTrace trace;
            episodes.push_back(orch.run_episode(opts.envs[i], env, store, archive, t, &trace));
            if (opts.record_sessions) gw.stop_recording();
            write_json_file(run_dir / "traces" / (tag + ".json"), to_json(trace));
        }
        save_store(store, run_dir / "store.json");
        archive.save(run_dir / "archive.ndjson");
        trials.push_back(aggregate_trial(t, std::move(episodes)));
        trial_timings.push_back(
            {{"trial_index", t},
             {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                       trial_start)
                             .count()}});
    }

    write_json_file(run_dir / "metrics.json", metrics_to_json(trials, opts));
    write_json_file(
        run_dir / "timings.json",
        {{"total_seconds",
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count()},
         {"trials", trial_timings}});
    return trials;
}

}  // namespace gradloop
