#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace gradloop {

enum class CompressionTier { full, medium, heavy };

std::string to_string(CompressionTier t);
CompressionTier compression_tier_from_string(const std::string& s);

// Insight token budget per tier under the whitespace token proxy.
int tier_cap(CompressionTier t);  // 350 / 150 / 100

// Consolidation strategy. tiered is the default; the others exist for
// compression ablations.
enum class CompressionMode { tiered, none, uniform, heavy };

std::string to_string(CompressionMode m);
CompressionMode compression_mode_from_string(const std::string& s);

// A consolidated reflexion: compressed insight plus the strength bookkeeping
// that drives retrieval eligibility and pruning.
struct MemoryEntry {
    std::int64_t id = 0;
    std::string source_task;
    std::string insight;
    double strength_0 = 0.0;
    std::int64_t created_at = 0;  // seconds since epoch
    CompressionTier compression_tier = CompressionTier::full;
    bool success_origin = false;
};

nlohmann::json to_json(const MemoryEntry& e);
MemoryEntry memory_entry_from_json(const nlohmann::json& j);

// Raw, uncompressed record kept permanently in the episodic archive.
struct ArchiveEntry {
    std::string source_task;
    int step_index = 0;
    std::string insight;
    bool success = false;
    std::int64_t created_at = 0;
};

nlohmann::json to_json(const ArchiveEntry& e);
ArchiveEntry archive_entry_from_json(const nlohmann::json& j);

}  // namespace gradloop
