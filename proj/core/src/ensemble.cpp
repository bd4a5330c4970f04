#include "zrp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace zrp {

namespace {

void check_density(double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::domain_error("density must be finite and >= 0");
}

// Accumulates the fugacity-family sums at fixed lambda. Returns nothing when
// the partition sum diverges (fugacity at or beyond the radius).
struct FamilySums {
    double z = 0.0;
    double mean = 0.0;      // sum k w / z
    double second = 0.0;    // sum k^2 w / z
    std::vector<double> pmf;
};

std::optional<FamilySums> try_family(const RateFunction& g, double lambda, double pmf_tail, double moment_tail) {
    constexpr long kCap = 1 << 21;
    double w = 1.0;  // weight of k = 0
    double z = 1.0, s1 = 0.0, s2 = 0.0;
    std::vector<double> pmf{1.0};
    bool pmf_open = true;
    for (long k = 1; k <= kCap; ++k) {
        w *= lambda / g(k);
        if (!std::isfinite(w) || w > 1e280) return std::nullopt;
        z += w;
        const double kd = static_cast<double>(k);
        s1 += kd * w;
        s2 += kd * kd * w;
        if (pmf_open) {
            pmf.push_back(w);
            if (w < pmf_tail * z && k > 4) pmf_open = false;
        }
        // geometric tail bound once the ratio settles below 1
        if (k > g.table_max()) {
            const double r = lambda / g(k + 1);
            if (r < 1.0) {
                const double tail = w * r / (1.0 - r);
                const double kd2 = kd + 2.0 / (1.0 - r);
                if (tail * kd2 * kd2 < moment_tail * std::max(z, 1.0) && k > 8) {
                    FamilySums out;
                    out.z = z;
                    out.mean = s1 / z;
                    out.second = s2 / z;
                    out.pmf = std::move(pmf);
                    for (double& p : out.pmf) p /= z;
                    return out;
                }
            } else {
                return std::nullopt;  // non-decaying terms beyond the table
            }
        }
    }
    return std::nullopt;  // no convergence within the cap: treat as divergent
}

}  // namespace

double flux(double rho) {
    check_density(rho);
    return rho / (1.0 + rho);
}

double flux_derivative(double rho) {
    check_density(rho);
    const double d = 1.0 + rho;
    return 1.0 / (d * d);
}

double occupancy_variance(double rho) {
    check_density(rho);
    return rho * (1.0 + rho);
}

Marginal fugacity_marginal(const RateFunction& g, double lambda, double tail_eps) {
    if (!(lambda >= 0.0)) throw std::domain_error("fugacity must be >= 0");
    auto fam = try_family(g, lambda, tail_eps, 1e-14);
    if (!fam) throw UnattainableDensity("partition sum diverges at this fugacity");
    Marginal m;
    m.lambda = lambda;
    m.density = fam->mean;
    m.variance = fam->second - fam->mean * fam->mean;
    m.pmf = std::move(fam->pmf);
    m.cdf.resize(m.pmf.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < m.pmf.size(); ++k) {
        acc += m.pmf[k];
        m.cdf[k] = acc;
    }
    if (!m.cdf.empty()) m.cdf.back() = 1.0;
    double mu4 = 0.0;
    for (std::size_t k = 0; k < m.pmf.size(); ++k) {
        const double d = static_cast<double>(k) - m.density;
        mu4 += d * d * d * d * m.pmf[k];
    }
    m.fourth_central = mu4;
    return m;
}

double solve_fugacity(double rho, const RateFunction& g) {
    check_density(rho);
    if (rho == 0.0) return 0.0;
    if (g.is_indicator()) return rho / (1.0 + rho);

    auto density_at = [&](double lam) -> std::optional<double> {
        auto fam = try_family(g, lam, 1.0, 1e-14);
        if (!fam) return std::nullopt;
        return fam->mean;
    };

    // bracket: grow hi until the density reaches rho or the sum diverges
    double lo = 0.0, hi = 1e-4;
    for (;;) {
        const auto d = density_at(hi);
        if (d && *d < rho) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e12) throw UnattainableDensity("density does not reach rho at any fugacity");
            continue;
        }
        break;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const auto d = density_at(mid);
        if (d && *d < rho) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (d && std::abs(*d - rho) <= 1e-12 * std::max(1.0, rho)) return mid;
    }
    const auto d = density_at(lo);
    if (!d || std::abs(*d - rho) > 1e-10 * std::max(1.0, rho))
        throw UnattainableDensity("density rho lies beyond the reachable range");
    return lo;
}

Statics solve_statics(double rho) {
    check_density(rho);
    Statics s;
    s.rho = rho;
    s.fugacity = flux(rho);
    s.flux_deriv = flux_derivative(rho);
    s.variance = occupancy_variance(rho);
    s.indicator = true;
    return s;
}

Statics solve_statics(double rho, const RateFunction& g) {
    if (g.is_indicator()) return solve_statics(rho);
    check_density(rho);
    Statics s;
    s.rho = rho;
    s.fugacity = solve_fugacity(rho, g);
    if (rho == 0.0) {
        s.flux_deriv = g(1);  // limit lambda/chi as rho -> 0
        s.variance = 0.0;
    } else {
        const Marginal m = fugacity_marginal(g, s.fugacity);
        s.variance = m.variance;
        s.flux_deriv = s.fugacity / s.variance;
    }
    s.indicator = false;
    return s;
}

std::vector<std::int32_t> sample_occupancies(double rho, std::int64_t sites, Rng& rng) {
    check_density(rho);
    std::vector<std::int32_t> occ(static_cast<std::size_t>(sites));
    if (rho == 0.0) return occ;
    const double p = rho / (1.0 + rho);
    for (auto& v : occ) v = static_cast<std::int32_t>(rng.geometric(p));
    return occ;
}

std::vector<std::int32_t> sample_occupancies(const Marginal& m, std::int64_t sites, Rng& rng) {
    std::vector<std::int32_t> occ(static_cast<std::size_t>(sites));
    for (auto& v : occ) {
        const double u = rng.u01();
        const auto it = std::lower_bound(m.cdf.begin(), m.cdf.end(), u);
        v = static_cast<std::int32_t>(it - m.cdf.begin());
    }
    return occ;
}

double canonical_mean_g(std::int64_t K, std::int64_t n) {
    if (K < 1) throw std::domain_error("need at least one site");
    if (n < 0) throw std::domain_error("particle count must be >= 0");
    if (n == 0) return 0.0;
    if (K == 1) return 1.0;  // g(n) with n >= 1
    return static_cast<double>(n) / static_cast<double>(n + K - 1);
}

double canonical_mean_g(std::int64_t K, std::int64_t n, const RateFunction& g) {
    if (g.is_indicator()) return canonical_mean_g(K, n);
    if (K < 1) throw std::domain_error("need at least one site");
    if (n < 0) throw std::domain_error("particle count must be >= 0");
    if (n == 0) return 0.0;
    if (K == 1) return g(n);

    // canonical weights W(k) = 1/(g(1)...g(k)); the fugacity power cancels
    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> w(nn + 1);
    w[0] = 1.0;
    for (std::size_t k = 1; k <= nn; ++k) w[k] = w[k - 1] / g(static_cast<long>(k));

    // z[j][m] built iteratively over sites; z1 = partition of K-1 sites
    std::vector<double> z(w), znext(nn + 1);
    for (std::int64_t j = 2; j <= K - 1; ++j) {
        for (std::size_t m = 0; m <= nn; ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= m; ++k) acc += w[k] * z[m - k];
            znext[m] = acc;
        }
        std::swap(z, znext);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k <= nn; ++k) {
        const double contrib = w[k] * z[nn - k];
        den += contrib;
        num += g(static_cast<long>(k)) * contrib;
    }
    return num / den;
}

double ensemble_equivalence_gap(std::int64_t K, std::int64_t n) {
    if (K < 1) throw std::domain_error("need at least one site");
    if (n < 0) throw std::domain_error("particle count must be >= 0");
    if (n == 0) return 0.0;
    // K = 1: |g(n) - flux(n)| = 1/(1+n); K >= 2: n/((n+K-1)(n+K)); both exact
    std::int64_t num, den;
    if (K == 1) {
        num = 1;
        den = 1 + n;
    } else {
        num = n;
        den = (n + K - 1) * (n + K);
    }
    const std::int64_t g = std::gcd(num, den);
    return static_cast<double>(num / g) / static_cast<double>(den / g);
}

double block_mean_fourth_moment(std::int64_t K, double rho) {
    if (K < 1) throw std::domain_error("need at least one site");
    check_density(rho);
    if (rho == 0.0) return 0.0;
    const double p = rho / (1.0 + rho);
    const double q = 1.0 - p;
    // exact summation of the single-site central moments
    double mu4 = 0.0, mu2 = 0.0, w = q;
    for (long k = 0;; ++k) {
        const double d = static_cast<double>(k) - rho;
        mu2 += d * d * w;
        mu4 += d * d * d * d * w;
        const double bound = w * p / (1.0 - p);
        const double reach = (static_cast<double>(k) + 1.0 / (1.0 - p)) + rho;
        if (k > 8 && bound * reach * reach * reach * reach < 1e-16 * (1.0 + mu4)) break;
        w *= p;
    }
    const double Kd = static_cast<double>(K);
    return (mu4 + 3.0 * (Kd - 1.0) * mu2 * mu2) / (Kd * Kd * Kd);
}

}  // namespace zrp
