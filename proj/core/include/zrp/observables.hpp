#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "zrp/engine.hpp"
#include "zrp/ensemble.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

inline std::int64_t mod_ring(std::int64_t v, std::int64_t L) {
    const std::int64_t r = v % L;
    return r < 0 ? r + L : r;
}

// Centered local rate: g(k) - phi(rho) - phi'(rho) (k - rho).
double v_g(const RateFunction& g, const Statics& st, std::int32_t k);

// Fluctuation field N^{-1/2} sum_x H((x - shift)/N)(eta(x) - rho), summed over
// the support window of H. shift is in sites: 0 for the lab frame, speed *
// elapsed micro time for the characteristic frame. Throws if the window does
// not fit in half the ring.
double field_value(const Configuration& eta, const TestFunction& H, double rho,
                   std::int64_t N, double shift);

// Fires a callback at the given micro times (each exactly once, in order).
class ScheduleObserver : public Observer {
public:
    using Callback = std::function<void(double s, const Configuration&)>;
    ScheduleObserver(std::vector<double> times, Callback fn);

    double next_checkpoint() const override;
    void on_checkpoint(double s, const Configuration& eta) override;

private:
    std::vector<double> times_;
    std::size_t next_ = 0;
    Callback fn_;
};

// Signed particle flow across one bond. In fixed mode the bond (b, b+1)
// never moves. In characteristic mode the bond advances right so that its
// offset from the start equals floor(speed * s); each advance removes the
// occupancy of the site that leaves the right half-line.
class CurrentObserver : public Observer {
public:
    static CurrentObserver fixed(std::int64_t bond);
    static CurrentObserver characteristic(std::int64_t bond, double speed);

    void on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) override;
    double next_checkpoint() const override;
    void on_checkpoint(double s, const Configuration& eta) override;

    std::int64_t current() const { return J_; }
    std::int64_t advances() const { return advances_; }
    std::int64_t bond() const { return bond_; }

private:
    std::int64_t bond_ = 0;
    double speed_ = 0.0;  // sites per micro time; 0 = fixed
    std::int64_t J_ = 0;
    std::int64_t advances_ = 0;
};

// Time integral of the windowed sum S(s) = sum_x H((x - origin - off)/N) f(eta_s(x))
// where f is the centered rate v_g (or eta - rho for the uncentered control) and
// off = floor(speed * s) quantizes the frame drift to whole sites. S is updated
// incrementally per jump and recomputed at every frame advance and on periodic
// audits. The integral is returned unweighted; callers apply the power of N
// that matches their time scale.
class BGObserver : public Observer {
public:
    enum class Integrand { centered_rate, density };

    BGObserver(const Configuration& eta, const RateFunction& g, const Statics& st,
               const TestFunction& H, std::int64_t N, std::int64_t origin,
               double speed, Integrand integrand);

    void on_hold(double s, double ds, const Configuration& eta) override;
    void on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) override;
    double next_checkpoint() const override;
    void on_checkpoint(double s, const Configuration& eta) override;

    double time_integral() const { return acc_; }  // integral of S ds, micro time
    double windowed_sum() const { return S_; }
    double max_audit_drift() const { return max_audit_drift_; }
    void audit(const Configuration& eta);

private:
    double site_term(std::int64_t x, std::int32_t k) const;
    double recompute(const Configuration& eta) const;

    const RateFunction* g_;
    Statics st_;
    std::int64_t N_;
    std::int64_t origin_;
    double speed_;
    Integrand integrand_;
    std::int64_t j_lo_, j_hi_;       // window in frame coordinates
    std::vector<double> w_;          // H(j/N), j in [j_lo, j_hi]
    std::int64_t L_;
    std::int64_t off_ = 0;
    double S_ = 0.0;
    double acc_ = 0.0, acc_c_ = 0.0;  // compensated time integral
    std::uint64_t jumps_ = 0;
    double max_audit_drift_ = 0.0;

    static constexpr std::uint64_t kAuditEvery = 1ull << 20;
};

// Drift and quadratic-variation integrals of the field martingale
// M_t = Y_t(H) - Y_0(H) - drift. Both integrands are windowed sums
// sum_x coef(x) g(eta(x)) with fixed coefficients built from the discrete
// gradient of H, updated incrementally per jump:
//   drift coef: p grad(x) - q grad(x-1), microscopic weight N^{-3/2};
//   qv    coef: p grad(x)^2 + q grad(x-1)^2, microscopic weight N^{-3}.
class MartingaleObserver : public Observer {
public:
    MartingaleObserver(const Configuration& eta, const DynamicsSpec& spec,
                       const TestFunction& H, std::int64_t origin);

    void on_hold(double s, double ds, const Configuration& eta) override;
    void on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) override;

    double drift_integral() const;   // N^{-3/2} weighted
    double qv_integral() const;      // N^{-3} weighted
    double grad_sq_sum() const { return grad_sq_sum_; }  // sum_x (grad H)^2 over the window
    double max_audit_drift() const { return max_audit_drift_; }
    void audit(const Configuration& eta);

private:
    const RateFunction* g_;
    std::int64_t N_;
    std::int64_t origin_;
    std::int64_t j_lo_, j_hi_;
    std::vector<double> cdrift_, cqv_;
    std::int64_t L_;
    double Sd_ = 0.0, Sq_ = 0.0;
    double Dacc_ = 0.0, Dc_ = 0.0;
    double Qacc_ = 0.0, Qc_ = 0.0;
    double grad_sq_sum_ = 0.0;
    std::uint64_t jumps_ = 0;
    double max_audit_drift_ = 0.0;

    static constexpr std::uint64_t kAuditEvery = 1ull << 20;
};

}  // namespace zrp
