#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "zrp/stats.hpp"

using namespace zrp::stats;

TEST_CASE("mean and variance on a frozen sample") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const MeanVar mv = mean_var(xs);
    CHECK(mv.n == 4);
    CHECK(mv.mean == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(mv.var == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(mv.se_mean == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-15));
    CHECK(mv.se_var > 0.0);
    CHECK_THROWS_AS((void)mean_var(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("covariance identities") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> xs(20000), ys(20000);
    for (auto& x : xs) x = normal(gen);
    for (auto& y : ys) y = normal(gen);

    const MeanVar mv = mean_var(xs);
    CHECK(covariance(xs, xs).cov == doctest::Approx(mv.var).epsilon(1e-12));

    std::vector<double> twice(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) twice[i] = 2.0 * xs[i];
    CHECK(covariance(xs, twice).cov == doctest::Approx(2.0 * mv.var).epsilon(1e-12));

    const CovarianceEst ind = covariance(xs, ys);
    CHECK(std::abs(ind.cov) <= 4.0 * ind.se);

    CHECK_THROWS_AS((void)covariance(xs, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("log-log slope recovers power laws") {
    const std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    std::vector<double> ys(xs.size());

    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] * xs[i];
    SlopeFit fit = loglog_slope(xs, ys);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.se_slope == doctest::Approx(0.0).epsilon(1e-10));

    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = 7.0 * std::pow(xs[i], -0.8);
    fit = loglog_slope(xs, ys);
    CHECK(fit.slope == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(7.0).epsilon(1e-10));

    // noisy power law: multiplicative lognormal noise, slope within 3 SE
    std::mt19937_64 gen(4242);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> bx, by;
    for (double x : {8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0}) {
        bx.push_back(x);
        by.push_back(3.0 * std::pow(x, -1.5) * std::exp(noise(gen)));
    }
    fit = loglog_slope(bx, by);
    CHECK(std::abs(fit.slope + 1.5) <= 3.0 * fit.se_slope);

    ys[0] = -1.0;
    CHECK_THROWS_AS((void)loglog_slope(xs, ys), std::domain_error);
}

TEST_CASE("plain linear fit") {
    const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> ys{3.0, 5.0, 7.0, 9.0};
    const SlopeFit fit = linear_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("gaussianity verdicts are calibrated") {
    std::mt19937_64 gen(20260814u);
    std::normal_distribution<double> normal(2.0, 3.0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = normal(gen);
    const GaussDiag good = gaussianity(xs);
    CHECK(good.pass);
    CHECK(std::abs(good.skew) <= good.skew_limit);
    CHECK(good.ks_distance <= good.ks_limit);

    std::exponential_distribution<double> expo(1.0);
    std::vector<double> es(100000);
    for (auto& e : es) e = expo(gen);
    const GaussDiag bad = gaussianity(es);
    CHECK_FALSE(bad.pass);
    CHECK(bad.skew > bad.skew_limit);  // exponential skewness is 2

    const std::vector<double> flat(2000, 1.25);
    CHECK_FALSE(gaussianity(flat).pass);

    CHECK_THROWS_AS((void)gaussianity(std::vector<double>(10, 0.0)), std::invalid_argument);
}

TEST_CASE("chi-square machinery") {
    // survival function at even dof has the closed form exp(-x/2) sum
    CHECK(chi2_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
    CHECK(chi2_sf(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(igamma_upper_reg(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

    const std::vector<double> observed{52.0, 48.0, 55.0, 45.0};
    const std::vector<double> expected{50.0, 50.0, 50.0, 50.0};
    const Chi2Result r = chi2_gof(observed, expected);
    CHECK(r.stat == doctest::Approx(1.16).epsilon(1e-12));
    CHECK(r.df == 3);
    CHECK(r.p == doctest::Approx(chi2_sf(1.16, 3.0)).epsilon(1e-12));

    std::vector<double> obs{9.0, 11.0, 4.0, 1.0};
    std::vector<double> exp{10.0, 10.0, 3.0, 2.0};
    pool_tail(obs, exp, 5.0);
    CHECK(exp.size() == 3);
    CHECK(exp[2] == doctest::Approx(5.0));
    CHECK(obs[2] == doctest::Approx(5.0));
}

TEST_CASE("chi-square p-values are roughly uniform under the null") {
    // draw multinomial counts, check the p-value lands in sane regions
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<int> die(0, 5);
    int below_05 = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> obs(6, 0.0), exp(6, 100.0);
        for (int i = 0; i < 600; ++i) obs[static_cast<std::size_t>(die(gen))] += 1.0;
        if (chi2_gof(obs, exp).p < 0.05) ++below_05;
    }
    // binomial(400, 0.05): mean 20, sd 4.4; allow a generous band
    CHECK(below_05 >= 5);
    CHECK(below_05 <= 40);
}
