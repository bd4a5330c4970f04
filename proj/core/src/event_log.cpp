#include "zrp/event_log.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace zrp {

namespace {

constexpr std::size_t kRecordBytes = 13;

void pack_record(const EventRecord& r, unsigned char* buf) {
    std::uint64_t bits;
    std::memcpy(&bits, &r.s, 8);
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    for (int i = 0; i < 4; ++i) buf[8 + i] = static_cast<unsigned char>(r.site >> (8 * i));
    buf[12] = static_cast<unsigned char>(r.dir);
}

EventRecord unpack_record(const unsigned char* buf) {
    EventRecord r;
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    std::memcpy(&r.s, &bits, 8);
    r.site = 0;
    for (int i = 0; i < 4; ++i) r.site |= static_cast<std::uint32_t>(buf[8 + i]) << (8 * i);
    r.dir = static_cast<std::int8_t>(buf[12]);
    return r;
}

}  // namespace

bool operator==(const EventRecord& a, const EventRecord& b) {
    return a.s == b.s && a.site == b.site && a.dir == b.dir;
}

void EventLogWriter::on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) {
    EventRecord r;
    r.s = s;
    r.site = static_cast<std::uint32_t>(x);
    r.dir = (y == eta.right_of(x)) ? std::int8_t{1} : std::int8_t{-1};
    unsigned char buf[kRecordBytes];
    pack_record(r, buf);
    out_->write(reinterpret_cast<const char*>(buf), kRecordBytes);
    ++count_;
}

std::vector<EventRecord> read_event_log(std::istream& in) {
    std::vector<EventRecord> out;
    unsigned char buf[kRecordBytes];
    for (;;) {
        in.read(reinterpret_cast<char*>(buf), kRecordBytes);
        const std::streamsize got = in.gcount();
        if (got == 0) break;
        if (got != static_cast<std::streamsize>(kRecordBytes))
            throw std::runtime_error("event log ends mid-record");
        out.push_back(unpack_record(buf));
    }
    return out;
}

Configuration replay(const Configuration& initial, const std::vector<EventRecord>& events) {
    Configuration eta = initial;
    for (const EventRecord& r : events) {
        const auto x = static_cast<std::int64_t>(r.site);
        const std::int64_t y = r.dir > 0 ? eta.right_of(x) : eta.left_of(x);
        eta.move(x, y);
    }
    return eta;
}

}  // namespace zrp
