#pragma once

#include "gradloop/clock.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <regex>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gradloop {

enum class Role {
    action_selection,
    reflexion,
    gradient,
    decompose,
    todo_verify,
    retrieve,
    merge,
    compress
};

enum class Tier { strategic_minimal, strategic_medium, lightweight };

std::string to_string(Role r);
std::string to_string(Tier t);
Role role_from_string(const std::string& s);
Tier tier_from_string(const std::string& s);

// Role → tier defaults: action selection runs on the minimal-reasoning tier,
// reflexion/gradient/merge/decompose on the medium tier, verification,
// retrieval and compression on the lightweight auxiliary tier.
Tier default_tier(Role r);
int default_max_tokens(Tier t);  // 256 / 1024 / 512

struct PromptRequest {
    Role role = Role::action_selection;
    Tier tier = Tier::strategic_minimal;
    std::string prompt_text;
    int max_output_tokens = 256;

    static PromptRequest make(Role role, std::string prompt_text);
};

struct CompletionResult {
    std::string text;
    std::string backend_id;
    bool cached = false;
    int latency_ms = 0;
};

enum class GatewayErrorKind { transport, replay_miss, scripted_miss, io, schema };

class GatewayError : public std::runtime_error {
public:
    GatewayError(GatewayErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind(kind) {}
    GatewayErrorKind kind;
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual CompletionResult complete(const PromptRequest& req) = 0;
    virtual std::string id() const = 0;
};

// One deterministic rule: all conditions present must hold, first matching
// rule wins. A regex pattern may carry capture groups referenced from the
// response template as $1..$9.
struct ScriptedRule {
    std::optional<Role> role;
    std::vector<std::string> contains_all;
    std::optional<std::string> regex;
    std::string response;
};

class ScriptedBackend : public LlmBackend {
public:
    // Compiles every regex up front; a bad pattern fails here, not mid-run.
    explicit ScriptedBackend(std::vector<ScriptedRule> rules);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& rules_path);

    CompletionResult complete(const PromptRequest& req) override;
    std::string id() const override { return "scripted"; }

private:
    std::vector<ScriptedRule> rules_;
    std::vector<std::optional<std::regex>> compiled_;  // parallel to rules_
};

// Session files are newline-delimited JSON: a header line
// {"schema_version", "created_at"} followed by one {"request", "response"}
// object per line.
inline constexpr int kSessionSchemaVersion = 1;

nlohmann::json to_json(const PromptRequest& r);
nlohmann::json to_json(const CompletionResult& r);
PromptRequest prompt_request_from_json(const nlohmann::json& j);
CompletionResult completion_result_from_json(const nlohmann::json& j);

class SessionRecorder {
public:
    SessionRecorder(const std::filesystem::path& path, const Clock& clock);
    // Appends one complete pair per line and flushes; a failed call never
    // reaches the file.
    void record(const PromptRequest& req, const CompletionResult& res);

private:
    std::ofstream out_;
};

std::vector<std::pair<PromptRequest, CompletionResult>> load_session(
    const std::filesystem::path& path);

class ReplayBackend : public LlmBackend {
public:
    static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& session_path);
    // Loads every *.ndjson session under dir (non-recursive).
    static std::shared_ptr<ReplayBackend> from_dir(const std::filesystem::path& session_dir);

    void add_session(const std::filesystem::path& session_path);
    CompletionResult complete(const PromptRequest& req) override;
    std::string id() const override { return "replay"; }
    std::size_t size() const { return responses_.size(); }

private:
    std::unordered_map<std::string, std::string> responses_;
};

struct LiveConfig {
    std::string endpoint_url;  // full URL, e.g. https://api.openai.com/v1/chat/completions
    std::string model_minimal = "primary-minimal";
    std::string model_medium = "primary-medium";
    std::string model_lightweight = "aux-light";
    std::string api_key;
    int timeout_s = 60;
    int max_attempts = 3;
    int backoff_initial_ms = 500;
};

// OpenAI-compatible chat-completion client with bounded exponential backoff
// on transient failures (connect errors, 429, 5xx).
class LiveBackend : public LlmBackend {
public:
    explicit LiveBackend(LiveConfig cfg);
    CompletionResult complete(const PromptRequest& req) override;
    std::string id() const override { return "live"; }
    const std::string& model_for(Tier t) const;

private:
    LiveConfig cfg_;
};

struct CallLogEntry {
    Role role;
    Tier tier;
    std::string prompt;
    std::string response;
    bool cached = false;
};

// Single entry point for every model call: response cache (lightweight tier
// only by default), call log for audit/tests, optional session recording.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<LlmBackend> backend);

    CompletionResult complete(const PromptRequest& req);

    void start_recording(const std::filesystem::path& path, const Clock& clock);
    void stop_recording();
    void set_cache_enabled(bool enabled);
    void clear_cache();

    const std::vector<CallLogEntry>& call_log() const { return call_log_; }
    void clear_call_log();
    std::string backend_id() const { return backend_->id(); }

private:
    std::shared_ptr<LlmBackend> backend_;
    bool cache_enabled_ = true;
    std::unordered_map<std::string, std::string> cache_;  // lightweight tier only
    std::vector<CallLogEntry> call_log_;
    std::unique_ptr<SessionRecorder> recorder_;
    mutable std::mutex mu_;
};

}  // namespace gradloop
