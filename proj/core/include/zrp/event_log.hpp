#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "zrp/engine.hpp"

namespace zrp {

struct EventRecord {
    double s;            // micro time of the jump
    std::uint32_t site;  // departure site
    std::int8_t dir;     // +1 right, -1 left
};

bool operator==(const EventRecord& a, const EventRecord& b);

// Streams jumps as fixed-width little-endian records:
// 8-byte IEEE-754 time, 4-byte unsigned site, 1-byte signed direction.
class EventLogWriter : public Observer {
public:
    explicit EventLogWriter(std::ostream& out) : out_(&out) {}

    void on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) override;
    std::uint64_t count() const { return count_; }

private:
    std::ostream* out_;
    std::uint64_t count_ = 0;
};

// Reads records until EOF; throws on a truncated trailing record.
std::vector<EventRecord> read_event_log(std::istream& in);

// Applies a recorded trajectory to a copy of the initial configuration.
Configuration replay(const Configuration& initial, const std::vector<EventRecord>& events);

}  // namespace zrp
