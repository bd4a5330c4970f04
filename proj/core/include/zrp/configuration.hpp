#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace zrp {

// Occupancy state on a ring of L sites. Particle moves preserve the total;
// the occupied-site count is kept incrementally for constant-rate dynamics.
class Configuration {
public:
    explicit Configuration(std::vector<std::int32_t> occ) : occ_(std::move(occ)) {
        if (occ_.empty()) throw std::invalid_argument("empty ring");
        for (auto v : occ_) {
            if (v < 0) throw std::invalid_argument("negative occupancy");
            total_ += v;
            if (v > 0) ++occupied_;
        }
    }

    std::int64_t L() const { return static_cast<std::int64_t>(occ_.size()); }
    std::int32_t occ(std::int64_t x) const { return occ_[static_cast<std::size_t>(x)]; }
    std::int64_t total() const { return total_; }
    std::int64_t occupied_count() const { return occupied_; }
    const std::vector<std::int32_t>& data() const { return occ_; }

    std::int64_t right_of(std::int64_t x) const { return x + 1 == L() ? 0 : x + 1; }
    std::int64_t left_of(std::int64_t x) const { return x == 0 ? L() - 1 : x - 1; }

    // one particle from x to y; total is conserved by construction
    void move(std::int64_t x, std::int64_t y) {
        auto& from = occ_[static_cast<std::size_t>(x)];
        if (from <= 0) throw std::logic_error("jump from an empty site");
        --from;
        if (from == 0) --occupied_;
        auto& to = occ_[static_cast<std::size_t>(y)];
        if (to == 0) ++occupied_;
        ++to;
    }

private:
    std::vector<std::int32_t> occ_;
    std::int64_t total_ = 0;
    std::int64_t occupied_ = 0;
};

}  // namespace zrp
