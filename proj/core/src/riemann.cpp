#include "zrp/riemann.hpp"

#include <cmath>
#include <stdexcept>

#include "zrp/ensemble.hpp"

namespace zrp {

double shock_speed(double rho_l, double rho_r) {
    if (!(rho_l >= 0.0) || !(rho_r >= 0.0)) throw std::domain_error("densities must be >= 0");
    return 1.0 / ((1.0 + rho_l) * (1.0 + rho_r));
}

double rarefaction_density(double xi) {
    if (!(xi > 0.0)) throw std::domain_error("fan variable must be positive");
    return 1.0 / std::sqrt(xi) - 1.0;
}

double riemann_density(double rho_l, double rho_r, double xi) {
    if (!(rho_l >= 0.0) || !(rho_r >= 0.0)) throw std::domain_error("densities must be >= 0");
    if (rho_l == rho_r) return rho_l;
    if (rho_l < rho_r) {
        // increasing step: entropy shock, characteristics run into it
        return xi < shock_speed(rho_l, rho_r) ? rho_l : rho_r;
    }
    // decreasing step: fan between the two characteristic speeds
    const double lo = flux_derivative(rho_l);
    const double hi = flux_derivative(rho_r);
    if (xi <= lo) return rho_l;
    if (xi >= hi) return rho_r;
    return rarefaction_density(xi);
}

}  // namespace zrp
