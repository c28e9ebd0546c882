#include "gradloop/gateway.hpp"

#include "gradloop/text.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <regex>
#include <thread>

namespace gradloop {

std::string to_string(Role r) {
    switch (r) {
        case Role::action_selection: return "action_selection";
        case Role::reflexion: return "reflexion";
        case Role::gradient: return "gradient";
        case Role::decompose: return "decompose";
        case Role::todo_verify: return "todo_verify";
        case Role::retrieve: return "retrieve";
        case Role::merge: return "merge";
        case Role::compress: return "compress";
    }
    throw std::logic_error("unreachable role");
}

std::string to_string(Tier t) {
    switch (t) {
        case Tier::strategic_minimal: return "strategic_minimal";
        case Tier::strategic_medium: return "strategic_medium";
        case Tier::lightweight: return "lightweight";
    }
    throw std::logic_error("unreachable tier");
}

Role role_from_string(const std::string& s) {
    for (Role r : {Role::action_selection, Role::reflexion, Role::gradient, Role::decompose,
                   Role::todo_verify, Role::retrieve, Role::merge, Role::compress}) {
        if (to_string(r) == s) return r;
    }
    throw std::invalid_argument("unknown role: " + s);
}

Tier tier_from_string(const std::string& s) {
    for (Tier t : {Tier::strategic_minimal, Tier::strategic_medium, Tier::lightweight}) {
        if (to_string(t) == s) return t;
    }
    throw std::invalid_argument("unknown tier: " + s);
}

Tier default_tier(Role r) {
    switch (r) {
        case Role::action_selection: return Tier::strategic_minimal;
        case Role::reflexion:
        case Role::gradient:
        case Role::merge:
        case Role::decompose: return Tier::strategic_medium;
        case Role::todo_verify:
        case Role::retrieve:
        case Role::compress: return Tier::lightweight;
    }
    throw std::logic_error("unreachable role");
}

int default_max_tokens(Tier t) {
    switch (t) {
        case Tier::strategic_minimal: return 256;
        case Tier::strategic_medium: return 1024;
        case Tier::lightweight: return 512;
    }
    throw std::logic_error("unreachable tier");
}

PromptRequest PromptRequest::make(Role role, std::string prompt_text) {
    PromptRequest r;
    r.role = role;
    r.tier = default_tier(role);
    r.prompt_text = std::move(prompt_text);
    r.max_output_tokens = default_max_tokens(r.tier);
    return r;
}

// --- scripted backend ---------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules) : rules_(std::move(rules)) {
    compiled_.reserve(rules_.size());
    for (const auto& rule : rules_) {
        if (!rule.regex) {
            compiled_.emplace_back();
            continue;
        }
        try {
            compiled_.emplace_back(std::regex(*rule.regex));
        } catch (const std::regex_error& e) {
            throw GatewayError(GatewayErrorKind::schema,
                               "bad scripted rule regex '" + *rule.regex + "': " + e.what());
        }
    }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(
    const std::filesystem::path& rules_path) {
    std::ifstream in(rules_path);
    if (!in) {
        throw GatewayError(GatewayErrorKind::io,
                           "cannot open scripted rules file: " + rules_path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorKind::schema,
                           "bad scripted rules file " + rules_path.string() + ": " + e.what());
    }
    std::vector<ScriptedRule> rules;
    for (const auto& rj : j.at("rules")) {
        ScriptedRule r;
        if (rj.contains("role")) r.role = role_from_string(rj.at("role").get<std::string>());
        if (rj.contains("contains")) r.contains_all.push_back(rj.at("contains").get<std::string>());
        if (rj.contains("contains_all")) {
            for (const auto& n : rj.at("contains_all")) {
                r.contains_all.push_back(n.get<std::string>());
            }
        }
        if (rj.contains("regex")) r.regex = rj.at("regex").get<std::string>();
        r.response = rj.at("response").get<std::string>();
        rules.push_back(std::move(r));
    }
    return std::make_shared<ScriptedBackend>(std::move(rules));
}

CompletionResult ScriptedBackend::complete(const PromptRequest& req) {
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        const auto& rule = rules_[r];
        if (rule.role && *rule.role != req.role) continue;
        bool ok = true;
        for (const auto& needle : rule.contains_all) {
            if (!contains(req.prompt_text, needle)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::string text = rule.response;
        if (compiled_[r]) {
            std::smatch m;
            if (!std::regex_search(req.prompt_text, m, *compiled_[r])) continue;
            // substitute $1..$9 with capture groups
            for (std::size_t g = 1; g < m.size() && g <= 9; ++g) {
                std::string key = "$" + std::to_string(g);
                std::size_t pos;
                while ((pos = text.find(key)) != std::string::npos) {
                    text.replace(pos, key.size(), m[g].str());
                }
            }
        }
        return CompletionResult{text, id(), false, 0};
    }
    throw GatewayError(GatewayErrorKind::scripted_miss,
                       "no scripted rule matches " + to_string(req.role) + " prompt");
}

// --- session record / replay ---------------------------------------------

nlohmann::json to_json(const PromptRequest& r) {
    return {{"role", to_string(r.role)},
            {"tier", to_string(r.tier)},
            {"prompt_text", r.prompt_text},
            {"max_output_tokens", r.max_output_tokens}};
}

nlohmann::json to_json(const CompletionResult& r) {
    return {{"text", r.text},
            {"backend_id", r.backend_id},
            {"cached", r.cached},
            {"latency_ms", r.latency_ms}};
}

PromptRequest prompt_request_from_json(const nlohmann::json& j) {
    PromptRequest r;
    r.role = role_from_string(j.at("role").get<std::string>());
    r.tier = tier_from_string(j.at("tier").get<std::string>());
    r.prompt_text = j.at("prompt_text").get<std::string>();
    r.max_output_tokens = j.at("max_output_tokens").get<int>();
    return r;
}

CompletionResult completion_result_from_json(const nlohmann::json& j) {
    CompletionResult r;
    r.text = j.at("text").get<std::string>();
    r.backend_id = j.at("backend_id").get<std::string>();
    r.cached = j.at("cached").get<bool>();
    r.latency_ms = j.at("latency_ms").get<int>();
    return r;
}

SessionRecorder::SessionRecorder(const std::filesystem::path& path, const Clock& clock) {
    out_.open(path, std::ios::trunc);
    if (!out_) {
        throw GatewayError(GatewayErrorKind::io, "cannot open session file: " + path.string());
    }
    nlohmann::json header = {{"schema_version", kSessionSchemaVersion},
                             {"created_at", to_iso8601(clock.now())}};
    out_ << header.dump() << "\n";
    out_.flush();
}

void SessionRecorder::record(const PromptRequest& req, const CompletionResult& res) {
    nlohmann::json line = {{"request", to_json(req)}, {"response", to_json(res)}};
    out_ << line.dump() << "\n";
    out_.flush();
}

std::vector<std::pair<PromptRequest, CompletionResult>> load_session(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw GatewayError(GatewayErrorKind::io, "cannot open session file: " + path.string());
    }
    std::vector<std::pair<PromptRequest, CompletionResult>> pairs;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayErrorKind::schema,
                               "bad session line in " + path.string() + ": " + e.what());
        }
        if (!header_seen) {
            if (!j.contains("schema_version")) {
                throw GatewayError(GatewayErrorKind::schema,
                                   "session header missing schema_version: " + path.string());
            }
            if (j.at("schema_version").get<int>() != kSessionSchemaVersion) {
                throw GatewayError(GatewayErrorKind::schema,
                                   "unsupported session schema version in " + path.string());
            }
            header_seen = true;
            continue;
        }
        pairs.emplace_back(prompt_request_from_json(j.at("request")),
                           completion_result_from_json(j.at("response")));
    }
    // An entirely empty file is a valid session with zero pairs.
    return pairs;
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& path) {
    auto b = std::make_shared<ReplayBackend>();
    b->add_session(path);
    return b;
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_dir(const std::filesystem::path& dir) {
    auto b = std::make_shared<ReplayBackend>();
    if (!std::filesystem::is_directory(dir)) {
        throw GatewayError(GatewayErrorKind::io, "not a session directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".ndjson") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) b->add_session(f);
    return b;
}

void ReplayBackend::add_session(const std::filesystem::path& path) {
    for (auto& [req, res] : load_session(path)) {
        responses_[req.prompt_text] = res.text;
    }
}

CompletionResult ReplayBackend::complete(const PromptRequest& req) {
    auto it = responses_.find(req.prompt_text);
    if (it == responses_.end()) {
        throw GatewayError(GatewayErrorKind::replay_miss,
                           "request not present in recording (" + to_string(req.role) + ")");
    }
    return CompletionResult{it->second, id(), true, 0};
}

// --- live backend ---------------------------------------------------------

LiveBackend::LiveBackend(LiveConfig cfg) : cfg_(std::move(cfg)) {}

const std::string& LiveBackend::model_for(Tier t) const {
    switch (t) {
        case Tier::strategic_minimal: return cfg_.model_minimal;
        case Tier::strategic_medium: return cfg_.model_medium;
        case Tier::lightweight: return cfg_.model_lightweight;
    }
    throw std::logic_error("unreachable tier");
}

namespace {

struct ParsedUrl {
    std::string scheme_host;  // scheme://host[:port], what httplib::Client wants
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw GatewayError(GatewayErrorKind::transport, "endpoint URL missing scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

CompletionResult LiveBackend::complete(const PromptRequest& req) {
    ParsedUrl url = parse_url(cfg_.endpoint_url);
    nlohmann::json body = {
        {"model", model_for(req.tier)},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt_text}}})},
        {"max_tokens", req.max_output_tokens}};
    const std::string payload = body.dump();

    std::string last_error;
    int backoff_ms = cfg_.backoff_initial_ms;
    auto started = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(url.scheme_host);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        client.set_write_timeout(cfg_.timeout_s, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            if (retryable_status(res->status)) continue;
            break;
        }
        try {
            auto j = nlohmann::json::parse(res->body);
            std::string text =
                j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (text.empty()) {
                last_error = "empty completion text";
                continue;
            }
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
            return CompletionResult{text, id(), false, static_cast<int>(elapsed)};
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed completion response: ") + e.what();
            break;
        }
    }
    throw GatewayError(GatewayErrorKind::transport, "live backend failed: " + last_error);
}

// --- gateway ---------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<LlmBackend> backend) : backend_(std::move(backend)) {}

CompletionResult Gateway::complete(const PromptRequest& req) {
    if (req.prompt_text.empty()) {
        throw GatewayError(GatewayErrorKind::transport, "empty prompt");
    }
    {
        std::lock_guard lock(mu_);
        if (cache_enabled_ && req.tier == Tier::lightweight) {
            auto it = cache_.find(req.prompt_text);
            if (it != cache_.end()) {
                CompletionResult res{it->second, backend_->id(), true, 0};
                call_log_.push_back({req.role, req.tier, req.prompt_text, res.text, true});
                if (recorder_) recorder_->record(req, res);
                return res;
            }
        }
    }
    CompletionResult res = backend_->complete(req);
    {
        std::lock_guard lock(mu_);
        if (cache_enabled_ && req.tier == Tier::lightweight) cache_[req.prompt_text] = res.text;
        call_log_.push_back({req.role, req.tier, req.prompt_text, res.text, res.cached});
        if (recorder_) recorder_->record(req, res);
    }
    return res;
}

void Gateway::start_recording(const std::filesystem::path& path, const Clock& clock) {
    std::lock_guard lock(mu_);
    recorder_ = std::make_unique<SessionRecorder>(path, clock);
}

void Gateway::stop_recording() {
    std::lock_guard lock(mu_);
    recorder_.reset();
}

void Gateway::set_cache_enabled(bool enabled) {
    std::lock_guard lock(mu_);
    cache_enabled_ = enabled;
}

void Gateway::clear_cache() {
    std::lock_guard lock(mu_);
    cache_.clear();
}

void Gateway::clear_call_log() {
    std::lock_guard lock(mu_);
    call_log_.clear();
}

}  // namespace gradloop
