#pragma once

#include <string>
#include <vector>

namespace zrp {

// Macroscopic profile H(u) with finite effective support [lo, hi].
// Gaussian support is truncated at 6 widths; the discarded tail is below
// 2e-8 pointwise, orders of magnitude under every statistical tolerance.
class TestFunction {
public:
    static TestFunction gaussian_bump(double center, double width);
    // G_n(u) = (1 - u/n)^+ on [0, n], zero for u < 0
    static TestFunction ramp(int n);
    // piecewise-linear through (u_i, v_i); zero outside [u_front, u_back]
    static TestFunction tabulated(std::vector<double> us, std::vector<double> vs);

    double operator()(double u) const;

    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    double support_width() const { return hi_ - lo_; }
    const std::string& label() const { return label_; }

    double l2sq() const;                                   // integral of H^2
    double grad_l2sq() const;                              // integral of H'^2
    double overlap(const TestFunction& g, double shift) const;  // int H(u+shift) g(u) du

private:
    enum class Kind { gaussian, ramp, tabulated };

    TestFunction() = default;

    Kind kind_ = Kind::gaussian;
    double center_ = 0.0;
    double width_ = 1.0;
    int n_ = 1;
    std::vector<double> us_, vs_;
    double lo_ = 0.0, hi_ = 0.0;
    std::string label_;
};

}  // namespace zrp
