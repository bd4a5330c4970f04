#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zrp::stats {

// Estimators work on raw sample arrays. Replica results are reduced by
// concatenation in replica order, so pooling per-replica outputs and pooling
// raw samples are the same operation, exactly.

struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;      // unbiased
    double se_mean = 0.0;
    double se_var = 0.0;   // fourth-moment formula
};
MeanVar mean_var(std::span<const double> xs);

struct CovarianceEst {
    std::size_t n = 0;
    double cov = 0.0;  // unbiased
    double se = 0.0;   // delta method
};
CovarianceEst covariance(std::span<const double> xs, std::span<const double> ys);

struct SlopeFit {
    std::size_t n = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;  // residual variance, n-2 dof
};
// least squares on (log x, log y); all inputs must be positive
SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys);
SlopeFit linear_fit(std::span<const double> xs, std::span<const double> ys);

// Moment and distance diagnostics against a fitted normal. Conservative
// gates: |skew| <= 4 sqrt(6/n), |ex.kurt| <= 4 sqrt(24/n), D <= 1.95/sqrt(n).
struct GaussDiag {
    std::size_t n = 0;
    double skew = 0.0;
    double excess_kurtosis = 0.0;
    double ks_distance = 0.0;
    double skew_limit = 0.0;
    double kurt_limit = 0.0;
    double ks_limit = 0.0;
    bool pass = false;
};
GaussDiag gaussianity(std::span<const double> xs);  // requires n >= 1000

struct Chi2Result {
    double stat = 0.0;
    std::size_t df = 0;
    double p = 0.0;
};
// Goodness of fit for binned counts against expected counts (fully specified
// model, df = bins - 1). Bins with expected < 5 should be pooled beforehand;
// pool_tail does that for a trailing tail.
Chi2Result chi2_gof(std::span<const double> observed, std::span<const double> expected);
void pool_tail(std::vector<double>& observed, std::vector<double>& expected, double min_expected = 5.0);

double norm_cdf(double z);
double chi2_sf(double stat, double df);          // upper tail probability
double igamma_upper_reg(double a, double x);     // regularized Q(a, x)

}  // namespace zrp::stats
