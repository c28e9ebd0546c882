// gradloop CLI: run benchmarks, replay recorded sessions, inspect run
// artifacts, validate configs, and dump generated worlds.

#include "gradloop/config.hpp"
#include "gradloop/memory.hpp"
#include "gradloop/microworld.hpp"
#include "gradloop/orchestrator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIo = 4;

using namespace gradloop;

std::shared_ptr<LlmBackend> make_backend(const std::string& desc, const RunFileConfig& cfg) {
    if (desc == "live") return std::make_shared<LiveBackend>(make_live_config(cfg.gateway));
    if (desc.rfind("scripted:", 0) == 0) return ScriptedBackend::from_file(desc.substr(9));
    if (desc.rfind("replay:", 0) == 0) return ReplayBackend::from_dir(desc.substr(7));
    throw std::invalid_argument("unknown backend '" + desc +
                                "' (expected live, scripted:<rules>, replay:<session_dir>)");
}

int run_with(const RunFileConfig& cfg, std::shared_ptr<LlmBackend> backend,
             const std::string& backend_desc, const std::filesystem::path& out_dir,
             bool record_sessions) {
    if (auto err = validate_config(cfg.episode)) {
        std::cerr << "config error: " << err->field << " " << err->message << "\n";
        return kExitConfig;
    }
    BenchmarkOptions opts;
    try {
        opts.orchestrator.mode = agent_mode_from_string(cfg.mode);
        opts.orchestrator.compression = compression_mode_from_string(cfg.compression);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    opts.orchestrator.cfg = cfg.episode;
    opts.orchestrator.clock_step_seconds = cfg.clock_step_seconds;
    opts.trials = cfg.trials;
    opts.record_sessions = record_sessions;
    opts.backend_descriptor = backend_desc;
    opts.envs = cfg.envs.empty() ? default_benchmark_envs(cfg.episode.horizon) : cfg.envs;

    Gateway gw(std::move(backend));
    gw.set_cache_enabled(cfg.gateway.cache_lightweight);
    SimClock clock;
    std::vector<TrialResult> trials;
    try {
        trials = run_benchmark(gw, clock, opts, out_dir);
    } catch (const GatewayError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    for (const auto& t : trials) {
        std::printf("trial %d: success_rate=%.3f mean_steps=%.1f loops=%d", t.trial_index,
                    t.success_rate, t.mean_steps, t.total_loops);
        if (t.alignment_total > 0) {
            std::printf(" alignment=%d/%d", t.alignment_matches, t.alignment_total);
        }
        std::printf("\n");
    }
    std::printf("run written to %s\n", out_dir.string().c_str());
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& backend_flag,
            const std::string& out_flag, const CLI::App& sub, int trials, std::string mode,
            std::string compression, std::int64_t clock_step, bool record) {
    RunFileConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_run_config(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    // flags override the file
    if (sub.count("--trials")) cfg.trials = trials;
    if (sub.count("--mode")) cfg.mode = std::move(mode);
    if (sub.count("--compression")) cfg.compression = std::move(compression);
    if (sub.count("--clock-step")) cfg.clock_step_seconds = clock_step;
    if (sub.count("--record")) cfg.record_sessions = record;
    if (sub.count("--backend")) cfg.backend = backend_flag;
    if (sub.count("--out")) cfg.out_dir = out_flag;
    if (cfg.out_dir.empty()) {
        std::cerr << "config error: no output directory (--out or benchmark.out_dir)\n";
        return kExitConfig;
    }

    std::shared_ptr<LlmBackend> backend;
    try {
        backend = make_backend(cfg.backend, cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GatewayError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    }
    return run_with(cfg, std::move(backend), cfg.backend, cfg.out_dir, cfg.record_sessions);
}

int cmd_replay(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir) {
    RunFileConfig cfg;
    try {
        std::ifstream in(run_dir / "config.json");
        if (!in) {
            std::cerr << "i/o error: no config.json under " << run_dir << "\n";
            return kExitIo;
        }
        nlohmann::json j;
        in >> j;
        cfg.episode = episode_config_from_json(j.at("episode"));
        cfg.mode = j.at("mode").get<std::string>();
        cfg.compression = j.at("compression").get<std::string>();
        cfg.clock_step_seconds = j.at("clock_step_seconds").get<std::int64_t>();
        cfg.trials = j.at("trials").get<int>();
        for (const auto& e : j.at("envs")) cfg.envs.push_back(env_spec_from_json(e));
    } catch (const std::exception& e) {
        std::cerr << "config error: cannot read run config: " << e.what() << "\n";
        return kExitConfig;
    }
    std::shared_ptr<LlmBackend> backend;
    try {
        backend = ReplayBackend::from_dir(run_dir / "sessions");
    } catch (const GatewayError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    }
    const std::string desc = "replay:" + (run_dir / "sessions").string();
    return run_with(cfg, std::move(backend), desc, out_dir, /*record_sessions=*/false);
}

int inspect_store(const std::filesystem::path& path, const std::string& now_iso) {
    ConsolidatedStore store;
    try {
        store = load_store(path);
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    std::int64_t now = now_iso.empty() ? store.last_decay_at : from_iso8601(now_iso);
    auto entries = store.entries;
    std::sort(entries.begin(), entries.end(), [&](const MemoryEntry& a, const MemoryEntry& b) {
        return current_strength(a, now) > current_strength(b, now);
    });
    std::printf("entries: %zu (now=%s)\n", entries.size(), to_iso8601(now).c_str());
    for (const auto& e : entries) {
        std::printf("[%5.2f] #%lld %s %s | %s :: %s\n", current_strength(e, now),
                    static_cast<long long>(e.id), to_string(e.compression_tier).c_str(),
                    e.success_origin ? "success" : "failed", e.source_task.c_str(),
                    e.insight.c_str());
    }
    return kExitOk;
}

int inspect_trace(const std::filesystem::path& path, int step) {
    nlohmann::json j;
    try {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        in >> j;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    const auto& steps = j.at("steps");
    auto print_step = [&](const nlohmann::json& s) {
        const auto& r = s.at("record");
        std::printf("Step %d: %s -> %s\n", r.at("step_index").get<int>(),
                    r.at("action").get<std::string>().c_str(),
                    r.at("next_state").get<std::string>().c_str());
        std::printf("  reward: %g  status: %s", r.at("reward").get<double>(),
                    r.at("success").get<bool>() ? "SUCCESS" : "FAILED");
        if (!r.at("todo_id_active").is_null()) {
            std::printf("  todo: %d", r.at("todo_id_active").get<int>());
        }
        std::printf("\n");
        if (!s.at("gradient").is_null()) {
            const auto& g = s.at("gradient");
            std::printf("  gradient: DIRECTION: %s | RECOMMENDED ACTION: %s | PROGRESS: %s\n",
                        g.at("direction").get<std::string>().c_str(),
                        g.at("recommended_action").get<std::string>().c_str(),
                        g.at("progress").get<std::string>().c_str());
        }
        if (!s.at("reflexion").is_null()) {
            std::printf("  reflexion: %s\n",
                        s.at("reflexion").at("text").get<std::string>().c_str());
        }
    };
    if (step >= 0) {
        for (const auto& s : steps) {
            if (s.at("record").at("step_index").get<int>() == step) {
                print_step(s);
                return kExitOk;
            }
        }
        std::cerr << "no step " << step << " in trace\n";
        return kExitIo;
    }
    const auto& env = j.at("env");
    std::printf("task: %s (seed %d)\n", env.at("task_description").get<std::string>().c_str(),
                env.at("seed").get<int>());
    for (const auto& s : steps) print_step(s);
    const auto& res = j.at("result");
    std::printf("result: %s in %d steps, loops=%d\n",
                res.at("success").get<bool>() ? "SUCCESS" : "FAILURE",
                res.at("steps_taken").get<int>(), res.at("loop_count").get<int>());
    return kExitOk;
}

int inspect_archive(const std::filesystem::path& path) {
    EpisodicArchive archive;
    try {
        archive = EpisodicArchive::load(path);
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    std::printf("entries: %zu\n", archive.size());
    for (const auto& e : archive.entries()) {
        std::printf("[%s step %d %s] %s\n", e.source_task.c_str(), e.step_index,
                    e.success ? "success" : "failed", e.insight.c_str());
    }
    return kExitOk;
}

int cmd_validate_config(const std::string& path) {
    RunFileConfig cfg;
    try {
        cfg = load_run_config(path);
        agent_mode_from_string(cfg.mode);
        compression_mode_from_string(cfg.compression);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (auto err = validate_config(cfg.episode)) {
        std::cerr << "config error: " << err->field << " " << err->message << "\n";
        return kExitConfig;
    }
    std::printf("ok\n");
    return kExitOk;
}

int cmd_print_world(const std::string& family, int seed, int horizon) {
    EnvSpec spec;
    try {
        spec.task_family = task_family_from_string(family);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    spec.seed = seed;
    spec.horizon = horizon;
    spec.task_description = Microworld::default_task_description(spec.task_family);
    Microworld world(spec);
    std::printf("task: %s\n", spec.task_description.c_str());
    std::printf("%s\n", world.reset().c_str());
    std::printf("%s", world.render_map().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradloop: coupled todo/reflexion/textual-gradient agent benchmark"};
    app.require_subcommand(1);

    // run
    std::string config_path, backend_desc = "live";
    std::string out_dir;
    int trials = 2;
    std::string mode = "full", compression = "tiered";
    std::int64_t clock_step = 10;
    bool record = true;
    auto* run = app.add_subcommand("run", "Run a benchmark");
    run->add_option("--config", config_path, "Run config JSON");
    run->add_option("--backend", backend_desc,
                    "live | scripted:<rules_path> | replay:<session_dir>");
    run->add_option("--out", out_dir, "Run output directory");
    run->add_option("--trials", trials, "Trial count override");
    run->add_option("--mode", mode, "full | reflexion_only | textgrad_only | sequential");
    run->add_option("--compression", compression, "tiered | none | uniform | heavy");
    run->add_option("--clock-step", clock_step, "Simulated seconds per step");
    run->add_flag("--record,!--no-record", record, "Record gateway sessions");

    // replay
    std::string replay_run_dir, replay_out;
    auto* replay = app.add_subcommand("replay", "Re-run a recorded run from its sessions");
    replay->add_option("run_dir", replay_run_dir, "Recorded run directory")->required();
    replay->add_option("--out", replay_out, "Output directory for the replayed run")->required();

    // inspect
    std::string target, inspect_path, now_iso;
    int step = -1;
    auto* inspect = app.add_subcommand("inspect", "Render run artifacts");
    inspect->add_option("target", target, "trace | store | archive")->required();
    inspect->add_option("path", inspect_path, "Artifact path")->required();
    inspect->add_option("--step", step, "Trace step to show");
    inspect->add_option("--now", now_iso, "Timestamp for strength evaluation (ISO-8601)");

    // validate-config
    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "Check a run config");
    validate->add_option("path", validate_path, "Config JSON path")->required();

    // print-world
    std::string family = "pick_cool_then_place";
    int seed = 0, horizon = 28;
    auto* pw = app.add_subcommand("print-world", "Dump a generated world");
    pw->add_option("--family", family, "Task family");
    pw->add_option("--seed", seed, "World seed");
    pw->add_option("--horizon", horizon, "Episode horizon");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return cmd_run(config_path, backend_desc, out_dir, *run, trials, mode, compression,
                       clock_step, record);
    }
    if (replay->parsed()) return cmd_replay(replay_run_dir, replay_out);
    if (inspect->parsed()) {
        if (target == "store") return inspect_store(inspect_path, now_iso);
        if (target == "trace") return inspect_trace(inspect_path, step);
        if (target == "archive") return inspect_archive(inspect_path);
        std::cerr << "config error: unknown inspect target '" << target << "'\n";
        return kExitConfig;
    }
    if (validate->parsed()) return cmd_validate_config(validate_path);
    if (pw->parsed()) return cmd_print_world(family, seed, horizon);
    return kExitConfig;
}
