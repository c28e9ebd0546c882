#pragma once

#include "gradloop/clock.hpp"
#include "gradloop/gateway.hpp"
#include "gradloop/memory_types.hpp"
#include "gradloop/reflexion.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gradloop {

// Tier 2: consolidated patterns with strength scoring. Decay is evaluated
// lazily from timestamps; decay_and_prune runs at episode boundaries.
struct ConsolidatedStore {
    std::vector<MemoryEntry> entries;
    std::int64_t last_decay_at = 0;
    std::int64_t next_id = 1;
};

// Forgetting curve: strength_0 * rate^(elapsed_hours).
double current_strength(const MemoryEntry& e, std::int64_t now,
                        double decay_rate_per_hour = 0.995);

// Heuristic priority: base 3.0, +2.0 success origin, +1.0 urgency keyword
// ("must"/"critical"/"never", case-insensitive), +0.5 brevity (< 500 tokens).
// Base 3.0 makes fresh memories exactly retrieval-eligible at the 3.0
// threshold, so failed keyword-free memories drop out after any decay.
double score_strength(const Reflexion& r);

ConsolidatedStore decay_and_prune(ConsolidatedStore store, std::int64_t now,
                                  double prune_below = 0.1, double decay_rate_per_hour = 0.995);

// Tier 3: permanent raw history, never consulted during inference.
class EpisodicArchive {
public:
    void append(ArchiveEntry e) { entries_.push_back(std::move(e)); }
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    void save(const std::filesystem::path& path) const;  // newline-delimited JSON
    static EpisodicArchive load(const std::filesystem::path& path);

private:
    std::vector<ArchiveEntry> entries_;
};

// End-of-episode consolidation: each working reflexion is compressed by
// recency offset (1-2 full, 3-5 medium, >5 heavy under tiered mode) through
// lightweight summarization calls, scored, stored, and archived raw. A
// failed compression call stores the reflexion truncated-verbatim at its cap
// instead of dropping it.
std::vector<MemoryEntry> consolidate_episode(Gateway& gw, ConsolidatedStore& store,
                                             EpisodicArchive& archive,
                                             const std::vector<Reflexion>& working,
                                             const std::string& task, std::int64_t now,
                                             CompressionMode mode = CompressionMode::tiered);

// Retrieval-eligible entries (current strength >= threshold), presented in
// descending current strength, ties broken by recency then id.
std::vector<MemoryEntry> strength_candidates(const ConsolidatedStore& store, std::int64_t now,
                                             double threshold,
                                             double decay_rate_per_hour = 0.995);

struct RetrievalResult {
    std::vector<MemoryEntry> entries;
    bool used_fallback = false;  // indices unparsable twice → top-k by strength
    bool llm_called = false;
};

// LLM-based semantic retrieval over the strength-filtered candidates. An
// empty candidate set returns immediately without a model call.
RetrievalResult retrieve(Gateway& gw, const ConsolidatedStore& store, const std::string& task,
                         const std::string& state, int top_k, std::int64_t now,
                         double threshold = 3.0, double decay_rate_per_hour = 0.995);

std::string build_retrieval_prompt(const std::string& task, const std::string& state,
                                   const std::vector<MemoryEntry>& candidates);

void save_store(const ConsolidatedStore& store, const std::filesystem::path& path);
ConsolidatedStore load_store(const std::filesystem::path& path);

}  // namespace gradloop
