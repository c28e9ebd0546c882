#pragma once

#include "gradloop/gateway.hpp"

#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace gradloop::testing {

inline std::filesystem::path fixture_rules_path() {
    return std::filesystem::path(GRADLOOP_FIXTURE_DIR) / "scripted_rules.json";
}

inline std::shared_ptr<ScriptedBackend> shipped_backend() {
    return ScriptedBackend::from_file(fixture_rules_path());
}

// Backend driven by an arbitrary function; handy for failure injection and
// call counting.
class LambdaBackend : public LlmBackend {
public:
    using Fn = std::function<CompletionResult(const PromptRequest&)>;
    explicit LambdaBackend(Fn fn) : fn_(std::move(fn)) {}
    CompletionResult complete(const PromptRequest& req) override { return fn_(req); }
    std::string id() const override { return "lambda"; }

private:
    Fn fn_;
};

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                ("gradloop_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace gradloop::testing
