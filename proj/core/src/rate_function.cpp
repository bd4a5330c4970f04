#include "zrp/rate_function.hpp"

#include <cmath>
#include <stdexcept>

namespace zrp {

RateFunction RateFunction::indicator() {
    RateFunction g;
    g.indicator_ = true;
    return g;
}

RateFunction RateFunction::from_table(std::vector<double> table) {
    if (table.size() < 2) throw std::invalid_argument("rate table needs g(0) and g(1)");
    if (table[0] != 0.0) throw std::invalid_argument("rate table must have g(0) = 0");
    for (std::size_t k = 1; k < table.size(); ++k) {
        if (!(table[k] > 0.0) || !std::isfinite(table[k]))
            throw std::invalid_argument("rates must be positive and finite for k >= 1");
    }
    RateFunction g;
    g.indicator_ = false;
    g.table_ = std::move(table);
    return g;
}

RateFunction RateFunction::linear(long kmax) {
    std::vector<double> table(static_cast<std::size_t>(kmax) + 1);
    for (long k = 0; k <= kmax; ++k) table[static_cast<std::size_t>(k)] = static_cast<double>(k);
    return from_table(std::move(table));
}

double RateFunction::max_increment() const {
    if (indicator_) return 1.0;
    double m = table_[1];  // |g(1) - g(0)|
    for (std::size_t k = 2; k < table_.size(); ++k) {
        m = std::max(m, std::abs(table_[k] - table_[k - 1]));
    }
    return m;
}

}  // namespace zrp
