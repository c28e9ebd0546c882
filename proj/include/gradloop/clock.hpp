#pragma once

#include <cstdint>
#include <string>

namespace gradloop {

// Seconds since the Unix epoch. The whole engine runs off an injected clock
// so that forgetting-curve decay is reproducible under replay.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now() const = 0;
};

// Deterministic clock advanced explicitly by the orchestrator (a fixed number
// of seconds per environment step).
class SimClock : public Clock {
public:
    // 2025-01-01T00:00:00Z
    explicit SimClock(std::int64_t start = 1735689600) : t_(start) {}
    std::int64_t now() const override { return t_; }
    void advance(std::int64_t seconds) { t_ += seconds; }

private:
    std::int64_t t_;
};

class SystemClock : public Clock {
public:
    std::int64_t now() const override;
};

std::string to_iso8601(std::int64_t seconds_since_epoch);
std::int64_t from_iso8601(const std::string& iso);  // throws std::invalid_argument

}  // namespace gradloop
