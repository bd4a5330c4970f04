#pragma once

namespace zrp {

// Entropy solution of d_t rho + d_x [rho/(1+rho)] = 0 with step initial data
// rho_l (x < 0), rho_r (x >= 0), evaluated at the similarity variable
// xi = x/t. The flux is strictly concave, so an increasing step resolves
// into a single shock and a decreasing step into a centered fan.

// shock: xi < sigma keeps rho_l, xi > sigma keeps rho_r
double shock_speed(double rho_l, double rho_r);  // 1/((1+rho_l)(1+rho_r))

// fan branch: the density whose characteristic speed equals xi
double rarefaction_density(double xi);  // 1/sqrt(xi) - 1

double riemann_density(double rho_l, double rho_r, double xi);

}  // namespace zrp
