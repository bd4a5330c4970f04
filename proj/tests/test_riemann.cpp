#include <cmath>

#include "doctest.h"
#include "zrp/ensemble.hpp"
#include "zrp/riemann.hpp"

using namespace zrp;

TEST_CASE("shock speeds") {
    CHECK(shock_speed(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(shock_speed(1.0, 3.0) == doctest::Approx(0.125).epsilon(1e-15));
    // jump condition: speed * (rho_r - rho_l) = flux(rho_r) - flux(rho_l)
    for (double rl : {0.0, 0.4, 1.0, 2.5}) {
        for (double rr : {0.2, 0.9, 1.7, 4.0}) {
            if (rl == rr) continue;
            const double s = shock_speed(rl, rr);
            CHECK(s * (rr - rl) == doctest::Approx(flux(rr) - flux(rl)).epsilon(1e-14));
        }
    }
}

TEST_CASE("increasing steps travel as admissible shocks") {
    for (double rl : {0.0, 0.3, 1.0}) {
        for (double rr : {1.5, 2.0, 5.0}) {
            const double s = shock_speed(rl, rr);
            // concave flux: characteristics run into the shock from both sides
            CHECK(flux_derivative(rl) > s);
            CHECK(s > flux_derivative(rr));
            CHECK(riemann_density(rl, rr, s - 0.01) == rl);
            CHECK(riemann_density(rl, rr, s + 0.01) == rr);
        }
    }
}

TEST_CASE("decreasing steps open a centered fan") {
    const double rl = 1.0, rr = 0.0;
    const double lo = flux_derivative(rl);  // 0.25
    const double hi = flux_derivative(rr);  // 1
    CHECK(riemann_density(rl, rr, lo - 1e-6) == rl);
    CHECK(riemann_density(rl, rr, hi + 1e-6) == rr);
    // inside the fan the density is the one whose characteristic speed is xi
    for (double xi : {0.3, 0.5, 0.7, 0.9}) {
        const double rho = riemann_density(rl, rr, xi);
        CHECK(rho == doctest::Approx(rarefaction_density(xi)).epsilon(1e-15));
        CHECK(flux_derivative(rho) == doctest::Approx(xi).epsilon(1e-12));
    }
    CHECK(rarefaction_density(0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rarefaction_density(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rarefaction_density(0.5) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));

    // profile is continuous at the fan edges and monotone across it
    double prev = riemann_density(rl, rr, 0.2);
    for (double xi = 0.21; xi < 1.05; xi += 0.01) {
        const double cur = riemann_density(rl, rr, xi);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}
