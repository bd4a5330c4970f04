#include "zrp/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zrp/quadrature.hpp"

namespace zrp {

namespace {
constexpr double kGaussianReach = 6.0;

std::string format_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
}  // namespace

TestFunction TestFunction::gaussian_bump(double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("bump width must be positive");
    TestFunction f;
    f.kind_ = Kind::gaussian;
    f.center_ = center;
    f.width_ = width;
    f.lo_ = center - kGaussianReach * width;
    f.hi_ = center + kGaussianReach * width;
    f.label_ = "bump(" + format_num(center) + "," + format_num(width) + ")";
    return f;
}

TestFunction TestFunction::ramp(int n) {
    if (n < 1) throw std::invalid_argument("ramp length must be >= 1");
    TestFunction f;
    f.kind_ = Kind::ramp;
    f.n_ = n;
    f.lo_ = 0.0;
    f.hi_ = static_cast<double>(n);
    f.label_ = "ramp(" + std::to_string(n) + ")";
    return f;
}

TestFunction TestFunction::tabulated(std::vector<double> us, std::vector<double> vs) {
    if (us.size() != vs.size() || us.size() < 2)
        throw std::invalid_argument("tabulated profile needs >= 2 matched knots");
    if (!std::is_sorted(us.begin(), us.end()))
        throw std::invalid_argument("tabulated knots must be sorted");
    TestFunction f;
    f.kind_ = Kind::tabulated;
    f.lo_ = us.front();
    f.hi_ = us.back();
    f.us_ = std::move(us);
    f.vs_ = std::move(vs);
    f.label_ = "tabulated(" + std::to_string(f.us_.size()) + ")";
    return f;
}

double TestFunction::operator()(double u) const {
    switch (kind_) {
        case Kind::gaussian: {
            if (u < lo_ || u > hi_) return 0.0;
            const double z = (u - center_) / width_;
            return std::exp(-0.5 * z * z);
        }
        case Kind::ramp: {
            if (u < 0.0) return 0.0;
            const double v = 1.0 - u / n_;
            return v > 0.0 ? v : 0.0;
        }
        case Kind::tabulated: {
            if (u <= lo_ || u >= hi_) return u == lo_ ? vs_.front() : (u == hi_ ? vs_.back() : 0.0);
            const auto it = std::upper_bound(us_.begin(), us_.end(), u);
            const std::size_t i = static_cast<std::size_t>(it - us_.begin());
            const double u0 = us_[i - 1], u1 = us_[i];
            const double w = u1 > u0 ? (u - u0) / (u1 - u0) : 0.0;
            return vs_[i - 1] * (1.0 - w) + vs_[i] * w;
        }
    }
    return 0.0;
}

double TestFunction::l2sq() const {
    const auto& f = *this;
    return integrate([&f](double u) { double v = f(u); return v * v; }, lo_, hi_);
}

double TestFunction::grad_l2sq() const {
    switch (kind_) {
        case Kind::gaussian:
            // int ((u-c)/w^2)^2 exp(-(u-c)^2/w^2) du = sqrt(pi) / (2 w)
            return std::sqrt(std::acos(-1.0)) / (2.0 * width_);
        case Kind::ramp:
            return 1.0 / n_;
        case Kind::tabulated: {
            double acc = 0.0;
            for (std::size_t i = 1; i < us_.size(); ++i) {
                const double dx = us_[i] - us_[i - 1];
                if (dx <= 0.0) continue;
                const double slope = (vs_[i] - vs_[i - 1]) / dx;
                acc += slope * slope * dx;
            }
            return acc;
        }
    }
    return 0.0;
}

double TestFunction::overlap(const TestFunction& g, double shift) const {
    const double a = std::max(g.lo_, lo_ - shift);
    const double b = std::min(g.hi_, hi_ - shift);
    if (!(a < b)) return 0.0;
    const auto& f = *this;
    return integrate([&f, &g, shift](double u) { return f(u + shift) * g(u); }, a, b);
}

}  // namespace zrp
