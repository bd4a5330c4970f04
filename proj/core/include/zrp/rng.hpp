#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace zrp {

// splitmix64 step; used for seed mixing so nearby seeds give unrelated streams
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic replica stream. Wraps mt19937_64 but draws uniforms through
// fixed bit manipulations so that values do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // uniform on (0,1); never returns 0 so -log(u) is finite
    double u01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform integer in [0, n), n > 0; rejection keeps it exactly uniform
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    double exponential(double rate) { return -std::log(u01()) / rate; }

    // geometric occupancy with P(k) = (1-p) p^k, p in [0,1)
    long geometric(double p) {
        if (p <= 0.0) return 0;
        return static_cast<long>(std::floor(std::log(u01()) / std::log(p)));
    }

    // standard normal via polar method (used by stats self tests only)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Replica seeds come from a cryptographic digest of (master, label, index);
// defined in sha256.cpp. Reseeding with the same triple is reproducible
// regardless of how work is scheduled across threads.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

}  // namespace zrp
