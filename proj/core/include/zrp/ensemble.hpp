#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "zrp/rate_function.hpp"
#include "zrp/rng.hpp"

namespace zrp {

// Requested density is not reachable within the fugacity family (partition
// sum diverges before the mean occupancy reaches rho).
struct UnattainableDensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- constant-rate statics (closed forms) ----
// invariant marginal is geometric with parameter p = rho/(1+rho)

double flux(double rho);                // mean jump rate per site, rho/(1+rho)
double flux_derivative(double rho);     // 1/(1+rho)^2
double occupancy_variance(double rho);  // rho(1+rho)

// ---- general rate statics via the fugacity family ----
// weights w(k) = lambda^k / (g(1)...g(k)); mean jump rate equals lambda

// Single-site marginal at fixed fugacity, truncated when the remaining tail
// is below tail_eps (moment sums use a tighter internal cutoff).
struct Marginal {
    double lambda = 0.0;
    double density = 0.0;
    double variance = 0.0;
    double fourth_central = 0.0;
    std::vector<double> pmf;  // k = 0..pmf.size()-1, renormalized
    std::vector<double> cdf;
};

Marginal fugacity_marginal(const RateFunction& g, double lambda, double tail_eps = 1e-12);

// Solves mean occupancy = rho for lambda by bisection, |density - rho| <= 1e-10.
double solve_fugacity(double rho, const RateFunction& g);

// Solved single-density statics bundle.
struct Statics {
    double rho = 0.0;
    double fugacity = 0.0;     // = flux
    double flux_deriv = 0.0;   // fugacity / variance for general g
    double variance = 0.0;
    bool indicator = true;
};

Statics solve_statics(double rho);                         // constant rate
Statics solve_statics(double rho, const RateFunction& g);  // general rate

// ---- equilibrium sampling ----

// i.i.d. geometric occupancies, inverse CDF; rho = 0 gives the empty state
std::vector<std::int32_t> sample_occupancies(double rho, std::int64_t sites, Rng& rng);
// general marginal, inverse CDF walk over the precomputed table
std::vector<std::int32_t> sample_occupancies(const Marginal& m, std::int64_t sites, Rng& rng);

// ---- canonical (fixed particle number) quantities ----

// E[g(occupancy at one site) | K sites carry n particles].
// Constant rate: n/(n+K-1) for K >= 2 (uniform over compositions); g(n) for K = 1.
double canonical_mean_g(std::int64_t K, std::int64_t n);
// General rate: exact dynamic program over canonical weights 1/(g(1)...g(k)).
double canonical_mean_g(std::int64_t K, std::int64_t n, const RateFunction& g);

// |canonical mean - flux(n/K)| evaluated in exact integer arithmetic for the
// constant-rate process: n/((n+K-1)(n+K)), rounded once.
double ensemble_equivalence_gap(std::int64_t K, std::int64_t n);

// Fourth central moment of the block average of K i.i.d. sites at density rho:
// (mu4 + 3(K-1) sigma^4) / K^3, with single-site moments summed exactly.
double block_mean_fourth_moment(std::int64_t K, double rho);

}  // namespace zrp
