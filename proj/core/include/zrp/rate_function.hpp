#pragma once

#include <cstdint>
#include <vector>

namespace zrp {

// Site interaction rate g: occupancy -> jump rate.
//
// The constant-rate process uses g(k) = 1{k >= 1}; that case has closed-form
// statics and an O(1) event sampler, so it is flagged. General rates come
// from a table g(1..kmax) with g extended as g(kmax) beyond the table; rates
// must satisfy g(0) = 0, g(k) > 0 for k >= 1, and bounded increments.
class RateFunction {
public:
    static RateFunction indicator();
    // table[k] = g(k) for k = 0..kmax; table[0] must be 0
    static RateFunction from_table(std::vector<double> table);
    // g(k) = k for k <= kmax (independent walkers; Poisson marginal)
    static RateFunction linear(long kmax = 512);

    double operator()(long k) const {
        if (k <= 0) return 0.0;
        if (indicator_) return 1.0;
        const auto idx = static_cast<std::size_t>(k);
        return idx < table_.size() ? table_[idx] : table_.back();
    }

    bool is_indicator() const { return indicator_; }
    long table_max() const { return indicator_ ? 1 : static_cast<long>(table_.size()) - 1; }
    // sup_k |g(k+1) - g(k)| over the stored range
    double max_increment() const;

private:
    RateFunction() = default;
    bool indicator_ = true;
    std::vector<double> table_;
};

}  // namespace zrp
