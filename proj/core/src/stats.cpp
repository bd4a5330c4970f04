#include "zrp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zrp::stats {

namespace {

double central_moment(std::span<const double> xs, double mean, int order) {
    double acc = 0.0;
    for (double x : xs) acc += std::pow(x - mean, order);
    return acc / static_cast<double>(xs.size());
}

}  // namespace

MeanVar mean_var(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("need at least two samples");
    MeanVar out;
    out.n = xs.size();
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / n;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - out.mean;
        ss += d * d;
    }
    out.var = ss / (n - 1.0);
    out.se_mean = std::sqrt(out.var / n);
    // Var(s^2) = (m4 - (n-3)/(n-1) s^4) / n with m4 the central fourth moment
    const double m4 = central_moment(xs, out.mean, 4);
    const double v = (m4 - (n - 3.0) / (n - 1.0) * out.var * out.var) / n;
    out.se_var = std::sqrt(std::max(0.0, v));
    return out;
}

CovarianceEst covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("need at least two samples");
    CovarianceEst out;
    out.n = xs.size();
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, m22 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        m22 += dx * dx * dy * dy;
    }
    out.cov = sxy / (n - 1.0);
    m22 /= n;
    out.se = std::sqrt(std::max(0.0, (m22 - out.cov * out.cov) / n));
    return out;
}

SlopeFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("need at least three points");
    SlopeFit out;
    out.n = xs.size();
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("x values are all equal");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (out.intercept + out.slope * xs[i]);
        ssr += r * r;
    }
    out.se_slope = std::sqrt(std::max(0.0, ssr / (n - 2.0) / sxx));
    return out;
}

SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0)) throw std::domain_error("loglog fit needs positive x");
        lx[i] = std::log(xs[i]);
    }
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(ys[i] > 0.0)) throw std::domain_error("loglog fit needs positive y");
        ly[i] = std::log(ys[i]);
    }
    return linear_fit(lx, ly);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

GaussDiag gaussianity(std::span<const double> xs) {
    if (xs.size() < 1000) throw std::invalid_argument("gaussianity diagnostics need n >= 1000");
    GaussDiag out;
    out.n = xs.size();
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    const double m2 = central_moment(xs, mean, 2);
    const double m3 = central_moment(xs, mean, 3);
    const double m4 = central_moment(xs, mean, 4);
    const double sd = std::sqrt(m2);
    out.skew = m3 / (sd * sd * sd);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = norm_cdf((sorted[i] - mean) / sd);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    out.ks_distance = d;
    out.skew_limit = 4.0 * std::sqrt(6.0 / n);
    out.kurt_limit = 4.0 * std::sqrt(24.0 / n);
    out.ks_limit = 1.95 / std::sqrt(n);
    out.pass = std::abs(out.skew) <= out.skew_limit &&
               std::abs(out.excess_kurtosis) <= out.kurt_limit &&
               out.ks_distance <= out.ks_limit;
    return out;
}

// Regularized upper incomplete gamma, series + continued fraction split.
double igamma_upper_reg(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("invalid incomplete gamma arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, return 1 - P
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - lg);
        return std::max(0.0, 1.0 - p);
    }
    // Q(a,x) by Lentz continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

double chi2_sf(double stat, double df) { return igamma_upper_reg(0.5 * df, 0.5 * stat); }

void pool_tail(std::vector<double>& observed, std::vector<double>& expected, double min_expected) {
    if (observed.size() != expected.size()) throw std::invalid_argument("length mismatch");
    while (expected.size() > 2 && expected.back() < min_expected) {
        expected[expected.size() - 2] += expected.back();
        observed[observed.size() - 2] += observed.back();
        expected.pop_back();
        observed.pop_back();
    }
}

Chi2Result chi2_gof(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size()) throw std::invalid_argument("length mismatch");
    if (observed.size() < 2) throw std::invalid_argument("need at least two bins");
    Chi2Result out;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0)) throw std::domain_error("expected counts must be positive");
        const double d = observed[i] - expected[i];
        out.stat += d * d / expected[i];
    }
    out.df = observed.size() - 1;
    out.p = chi2_sf(out.stat, static_cast<double>(out.df));
    return out;
}

}  // namespace zrp::stats
