#pragma once

namespace zrp {

// Kahan compensated accumulator. Time integrals add ~1e8 tiny increments;
// plain summation would lose several digits over a long run.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
    void reset() { sum = 0.0; carry = 0.0; }
};

}  // namespace zrp
