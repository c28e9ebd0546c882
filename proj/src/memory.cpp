#include "gradloop/memory.hpp"

#include "gradloop/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gradloop {

std::string to_string(CompressionTier t) {
    switch (t) {
        case CompressionTier::full: return "full";
        case CompressionTier::medium: return "medium";
        case CompressionTier::heavy: return "heavy";
    }
    throw std::logic_error("unreachable compression tier");
}

CompressionTier compression_tier_from_string(const std::string& s) {
    for (CompressionTier t : {CompressionTier::full, CompressionTier::medium,
                              CompressionTier::heavy}) {
        if (to_string(t) == s) return t;
    }
    throw std::invalid_argument("unknown compression tier: " + s);
}

int tier_cap(CompressionTier t) {
    switch (t) {
        case CompressionTier::full: return 350;
        case CompressionTier::medium: return 150;
        case CompressionTier::heavy: return 100;
    }
    throw std::logic_error("unreachable compression tier");
}

std::string to_string(CompressionMode m) {
    switch (m) {
        case CompressionMode::tiered: return "tiered";
        case CompressionMode::none: return "none";
        case CompressionMode::uniform: return "uniform";
        case CompressionMode::heavy: return "heavy";
    }
    throw std::logic_error("unreachable compression mode");
}

CompressionMode compression_mode_from_string(const std::string& s) {
    for (CompressionMode m : {CompressionMode::tiered, CompressionMode::none,
                              CompressionMode::uniform, CompressionMode::heavy}) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument("unknown compression mode: " + s);
}

nlohmann::json to_json(const MemoryEntry& e) {
    return {{"id", e.id},
            {"source_task", e.source_task},
            {"insight", e.insight},
            {"strength_0", e.strength_0},
            {"created_at", to_iso8601(e.created_at)},
            {"compression_tier", to_string(e.compression_tier)},
            {"success_origin", e.success_origin}};
}

MemoryEntry memory_entry_from_json(const nlohmann::json& j) {
    MemoryEntry e;
    e.id = j.at("id").get<std::int64_t>();
    e.source_task = j.at("source_task").get<std::string>();
    e.insight = j.at("insight").get<std::string>();
    e.strength_0 = j.at("strength_0").get<double>();
    e.created_at = from_iso8601(j.at("created_at").get<std::string>());
    e.compression_tier = compression_tier_from_string(j.at("compression_tier").get<std::string>());
    e.success_origin = j.at("success_origin").get<bool>();
    return e;
}

nlohmann::json to_json(const ArchiveEntry& e) {
    return {{"source_task", e.source_task},
            {"step_index", e.step_index},
            {"insight", e.insight},
            {"success", e.success},
            {"created_at", to_iso8601(e.created_at)}};
}

ArchiveEntry archive_entry_from_json(const nlohmann::json& j) {
    ArchiveEntry e;
    e.source_task = j.at("source_task").get<std::string>();
    e.step_index = j.at("step_index").get<int>();
    e.insight = j.at("insight").get<std::string>();
    e.success = j.at("success").get<bool>();
    e.created_at = from_iso8601(j.at("created_at").get<std::string>());
    return e;
}

double current_strength(const MemoryEntry& e, std::int64_t now, double decay_rate_per_hour) {
    const double hours = static_cast<double>(now - e.created_at) / 3600.0;
    return e.strength_0 * std::pow(decay_rate_per_hour, hours);
}

double score_strength(const Reflexion& r) {
    double s = 3.0;
    if (r.success) s += 2.0;
    if (contains_ci(r.text, "must") || contains_ci(r.text, "critical") ||
        contains_ci(r.text, "never")) {
        s += 1.0;
    }
    if (token_count(r.text) < 500) s += 0.5;
    return s;
}

ConsolidatedStore decay_and_prune(ConsolidatedStore store, std::int64_t now, double prune_below,
                                  double decay_rate_per_hour) {
    std::erase_if(store.entries, [&](const MemoryEntry& e) {
        return current_strength(e, now, decay_rate_per_hour) < prune_below;
    });
    store.last_decay_at = now;
    return store;
}

void EpisodicArchive::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write archive: " + path.string());
    for (const auto& e : entries_) out << to_json(e).dump() << "\n";
}

EpisodicArchive EpisodicArchive::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read archive: " + path.string());
    EpisodicArchive a;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        a.append(archive_entry_from_json(nlohmann::json::parse(line)));
    }
    return a;
}

namespace {

CompressionTier tier_for_offset(int offset, CompressionMode mode) {
    switch (mode) {
        case CompressionMode::none: return CompressionTier::full;
        case CompressionMode::uniform: return CompressionTier::medium;
        case CompressionMode::heavy: return CompressionTier::heavy;
        case CompressionMode::tiered: break;
    }
    if (offset <= 2) return CompressionTier::full;
    if (offset <= 5) return CompressionTier::medium;
    return CompressionTier::heavy;
}

std::string compress_insight(Gateway& gw, const std::string& text, CompressionTier tier) {
    const int cap = tier_cap(tier);
    if (token_count(text) <= cap) return text;
    std::string p = "Compress the following insight to at most " + std::to_string(cap) +
                    " words, keeping the causal pattern.\n";
    if (tier == CompressionTier::heavy) p += "Extract bullet points only.\n";
    p += "INSIGHT: " + text + "\n";
    try {
        auto res = gw.complete(PromptRequest::make(Role::compress, p));
        return truncate_tokens(trim(res.text), cap);
    } catch (const GatewayError&) {
        return truncate_tokens(text, cap);  // keep it, never drop it
    }
}

}  // namespace

std::vector<MemoryEntry> consolidate_episode(Gateway& gw, ConsolidatedStore& store,
                                             EpisodicArchive& archive,
                                             const std::vector<Reflexion>& working,
                                             const std::string& task, std::int64_t now,
                                             CompressionMode mode) {
    std::vector<MemoryEntry> added;
    const int n = static_cast<int>(working.size());
    for (int i = 0; i < n; ++i) {
        const Reflexion& r = working[i];
        const int offset = n - i;  // most recent reflexion has offset 1
        const CompressionTier tier = tier_for_offset(offset, mode);

        MemoryEntry e;
        e.id = store.next_id++;
        e.source_task = task;
        e.insight = compress_insight(gw, r.text, tier);
        e.strength_0 = score_strength(r);
        e.created_at = now;
        e.compression_tier = tier;
        e.success_origin = r.success;
        store.entries.push_back(e);
        added.push_back(e);

        archive.append({task, r.step_index, r.text, r.success, now});
    }
    return added;
}

std::vector<MemoryEntry> strength_candidates(const ConsolidatedStore& store, std::int64_t now,
                                             double threshold, double decay_rate_per_hour) {
    std::vector<MemoryEntry> out;
    for (const auto& e : store.entries) {
        if (current_strength(e, now, decay_rate_per_hour) >= threshold) out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [&](const MemoryEntry& a, const MemoryEntry& b) {
        double sa = current_strength(a, now, decay_rate_per_hour);
        double sb = current_strength(b, now, decay_rate_per_hour);
        if (sa != sb) return sa > sb;
        if (a.created_at != b.created_at) return a.created_at > b.created_at;
        return a.id > b.id;
    });
    return out;
}

std::string build_retrieval_prompt(const std::string& task, const std::string& state,
                                   const std::vector<MemoryEntry>& candidates) {
    std::string p;
    p += "CURRENT TASK: " + task + "\n";
    p += "CURRENT STATE: " + state + "\n";
    p += "AVAILABLE MEMORIES:\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        p += "[" + std::to_string(i) + "] Past task: \"" + candidates[i].source_task +
             "\", Learning: \"" + candidates[i].insight + "\"\n";
    }
    p += "Which memories are MOST USEFUL for the current task?\n";
    p += "Return JSON array of indices: [i1, i2, ...]\n";
    return p;
}

namespace {

// Extracts the first JSON integer array from the reply, keeping the first
// top_k distinct in-range indices.
std::optional<std::vector<std::size_t>> parse_indices(const std::string& reply,
                                                      std::size_t candidate_count,
                                                      int top_k) {
    auto open = reply.find('[');
    auto close = reply.find(']', open == std::string::npos ? 0 : open);
    if (open == std::string::npos || close == std::string::npos) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(reply.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!j.is_array()) return std::nullopt;
    std::vector<std::size_t> indices;
    for (const auto& v : j) {
        if (!v.is_number_integer()) return std::nullopt;
        auto idx = v.get<long long>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= candidate_count) continue;
        auto u = static_cast<std::size_t>(idx);
        if (std::find(indices.begin(), indices.end(), u) != indices.end()) continue;
        indices.push_back(u);
        if (static_cast<int>(indices.size()) == top_k) break;
    }
    return indices;
}

}  // namespace

RetrievalResult retrieve(Gateway& gw, const ConsolidatedStore& store, const std::string& task,
                         const std::string& state, int top_k, std::int64_t now, double threshold,
                         double decay_rate_per_hour) {
    RetrievalResult result;
    auto candidates = strength_candidates(store, now, threshold, decay_rate_per_hour);
    if (candidates.empty()) return result;

    const std::string prompt = build_retrieval_prompt(task, state, candidates);
    result.llm_called = true;
    auto reply = gw.complete(PromptRequest::make(Role::retrieve, prompt));
    auto indices = parse_indices(reply.text, candidates.size(), top_k);
    if (!indices) {
        const std::string reprompt =
            prompt + "\nRespond with a JSON array of integer indices only.\n";
        auto retry = gw.complete(PromptRequest::make(Role::retrieve, reprompt));
        indices = parse_indices(retry.text, candidates.size(), top_k);
    }
    if (!indices) {
        result.used_fallback = true;
        for (int i = 0; i < top_k && i < static_cast<int>(candidates.size()); ++i) {
            result.entries.push_back(candidates[i]);
        }
        return result;
    }
    for (auto idx : *indices) result.entries.push_back(candidates[idx]);
    return result;
}

void save_store(const ConsolidatedStore& store, const std::filesystem::path& path) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : store.entries) entries.push_back(to_json(e));
    nlohmann::json j = {{"entries", entries},
                        {"last_decay_at", to_iso8601(store.last_decay_at)},
                        {"next_id", store.next_id}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write store: " + path.string());
    out << j.dump(2) << "\n";
}

ConsolidatedStore load_store(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read store: " + path.string());
    nlohmann::json j;
    in >> j;
    ConsolidatedStore store;
    for (const auto& ej : j.at("entries")) store.entries.push_back(memory_entry_from_json(ej));
    store.last_decay_at = from_iso8601(j.at("last_decay_at").get<std::string>());
    store.next_id = j.at("next_id").get<std::int64_t>();
    return store;
}

}  // namespace gradloop
