#include "zrp/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zrp/kahan.hpp"

namespace zrp {

namespace {

// relative frame coordinate of ring site x with respect to base, folded into
// [j_lo, j_hi] if possible; windows are asserted to span at most half the ring
bool window_rel(std::int64_t x, std::int64_t base, std::int64_t L, std::int64_t j_lo,
                std::int64_t j_hi, std::int64_t* j_out) {
    const std::int64_t r = mod_ring(x - base, L);
    if (r <= j_hi && r >= j_lo) {
        *j_out = r;
        return true;
    }
    if (r - L >= j_lo && r - L <= j_hi) {
        *j_out = r - L;
        return true;
    }
    return false;
}

void kahan_add(double v, double* acc, double* carry) {
    const double y = v - *carry;
    const double t = *acc + y;
    *carry = (t - *acc) - y;
    *acc = t;
}

}  // namespace

double v_g(const RateFunction& g, const Statics& st, std::int32_t k) {
    return g(k) - st.fugacity - st.flux_deriv * (static_cast<double>(k) - st.rho);
}

double field_value(const Configuration& eta, const TestFunction& H, double rho,
                   std::int64_t N, double shift) {
    const std::int64_t L = eta.L();
    const auto x_lo = static_cast<std::int64_t>(std::ceil(H.support_lo() * N + shift));
    const auto x_hi = static_cast<std::int64_t>(std::floor(H.support_hi() * N + shift));
    if (x_hi - x_lo + 1 > L / 2)
        throw std::invalid_argument("test function window exceeds half the ring; enlarge the torus factor");
    const double inv_n = 1.0 / static_cast<double>(N);
    Kahan sum;
    for (std::int64_t x = x_lo; x <= x_hi; ++x) {
        const double h = H((static_cast<double>(x) - shift) * inv_n);
        sum.add(h * (eta.occ(mod_ring(x, L)) - rho));
    }
    return sum.value() / std::sqrt(static_cast<double>(N));
}

// ---- ScheduleObserver ----

ScheduleObserver::ScheduleObserver(std::vector<double> times, Callback fn)
    : times_(std::move(times)), fn_(std::move(fn)) {
    if (!std::is_sorted(times_.begin(), times_.end()))
        throw std::invalid_argument("checkpoint times must be sorted");
}

double ScheduleObserver::next_checkpoint() const {
    return next_ < times_.size() ? times_[next_] : std::numeric_limits<double>::infinity();
}

void ScheduleObserver::on_checkpoint(double s, const Configuration& eta) {
    if (next_ >= times_.size() || times_[next_] > s) return;
    const double scheduled = times_[next_];
    ++next_;
    fn_(scheduled, eta);
}

// ---- CurrentObserver ----

CurrentObserver CurrentObserver::fixed(std::int64_t bond) {
    CurrentObserver c;
    c.bond_ = bond;
    return c;
}

CurrentObserver CurrentObserver::characteristic(std::int64_t bond, double speed) {
    if (!(speed > 0.0)) throw std::invalid_argument("characteristic speed must be positive");
    CurrentObserver c;
    c.bond_ = bond;
    c.speed_ = speed;
    return c;
}

void CurrentObserver::on_jump(double, std::int64_t x, std::int64_t y, const Configuration& eta) {
    if (x == bond_ && y == eta.right_of(x)) {
        ++J_;
    } else if (y == bond_ && x == eta.right_of(bond_)) {
        --J_;
    }
}

double CurrentObserver::next_checkpoint() const {
    if (speed_ <= 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(advances_ + 1) / speed_;
}

void CurrentObserver::on_checkpoint(double s, const Configuration& eta) {
    if (static_cast<double>(advances_ + 1) / speed_ > s) return;
    if (advances_ + 1 > eta.L() / 2)
        throw std::runtime_error("characteristic bond wrapped past half the ring; enlarge the torus factor");
    J_ -= eta.occ(eta.right_of(bond_));
    bond_ = eta.right_of(bond_);
    ++advances_;
}

// ---- BGObserver ----

BGObserver::BGObserver(const Configuration& eta, const RateFunction& g, const Statics& st,
                       const TestFunction& H, std::int64_t N, std::int64_t origin,
                       double speed, Integrand integrand)
    : g_(&g), st_(st), N_(N), origin_(origin), speed_(speed), integrand_(integrand), L_(eta.L()) {
    j_lo_ = static_cast<std::int64_t>(std::ceil(H.support_lo() * N));
    j_hi_ = static_cast<std::int64_t>(std::floor(H.support_hi() * N));
    if (j_hi_ - j_lo_ + 1 > L_ / 2)
        throw std::invalid_argument("test function window exceeds half the ring; enlarge the torus factor");
    w_.resize(static_cast<std::size_t>(j_hi_ - j_lo_ + 1));
    const double inv_n = 1.0 / static_cast<double>(N_);
    for (std::int64_t j = j_lo_; j <= j_hi_; ++j)
        w_[static_cast<std::size_t>(j - j_lo_)] = H(static_cast<double>(j) * inv_n);
    S_ = recompute(eta);
}

double BGObserver::site_term(std::int64_t x, std::int32_t k) const {
    std::int64_t j;
    if (!window_rel(x, origin_ + off_, L_, j_lo_, j_hi_, &j)) return 0.0;
    const double f = integrand_ == Integrand::centered_rate
                         ? v_g(*g_, st_, k)
                         : static_cast<double>(k) - st_.rho;
    return w_[static_cast<std::size_t>(j - j_lo_)] * f;
}

double BGObserver::recompute(const Configuration& eta) const {
    Kahan sum;
    const std::int64_t base = origin_ + off_;
    for (std::int64_t j = j_lo_; j <= j_hi_; ++j) {
        const std::int64_t x = mod_ring(base + j, L_);
        const double f = integrand_ == Integrand::centered_rate
                             ? v_g(*g_, st_, eta.occ(x))
                             : static_cast<double>(eta.occ(x)) - st_.rho;
        sum.add(w_[static_cast<std::size_t>(j - j_lo_)] * f);
    }
    return sum.value();
}

void BGObserver::on_hold(double, double ds, const Configuration&) {
    kahan_add(S_ * ds, &acc_, &acc_c_);
}

void BGObserver::on_jump(double, std::int64_t x, std::int64_t y, const Configuration& eta) {
    const std::int32_t kx = eta.occ(x);
    const std::int32_t ky = eta.occ(y);
    S_ += site_term(x, kx) - site_term(x, kx + 1);
    S_ += site_term(y, ky) - site_term(y, ky - 1);
    if (++jumps_ % kAuditEvery == 0) audit(eta);
}

double BGObserver::next_checkpoint() const {
    if (speed_ <= 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(off_ + 1) / speed_;
}

void BGObserver::on_checkpoint(double s, const Configuration& eta) {
    if (static_cast<double>(off_ + 1) / speed_ > s) return;
    ++off_;
    if (off_ > L_)
        throw std::runtime_error("frame drift wrapped the ring; enlarge the torus factor");
    S_ = recompute(eta);
}

void BGObserver::audit(const Configuration& eta) {
    const double fresh = recompute(eta);
    const double scale = std::max(1.0, std::abs(fresh));
    max_audit_drift_ = std::max(max_audit_drift_, std::abs(fresh - S_) / scale);
    S_ = fresh;
}

// ---- MartingaleObserver ----

MartingaleObserver::MartingaleObserver(const Configuration& eta, const DynamicsSpec& spec,
                                       const TestFunction& H, std::int64_t origin)
    : g_(&spec.g), N_(spec.N), origin_(origin), L_(eta.L()) {
    const double p = spec.p_right;
    const double q = 1.0 - p;
    const auto h_lo = static_cast<std::int64_t>(std::ceil(H.support_lo() * N_));
    const auto h_hi = static_cast<std::int64_t>(std::floor(H.support_hi() * N_));
    // gradient lives on [h_lo - 1, h_hi]; coefficients touch one site more
    j_lo_ = h_lo - 1;
    j_hi_ = h_hi + 1;
    if (j_hi_ - j_lo_ + 1 > L_ / 2)
        throw std::invalid_argument("test function window exceeds half the ring; enlarge the torus factor");
    const double inv_n = 1.0 / static_cast<double>(N_);
    const auto grad = [&](std::int64_t j) -> double {
        if (j < j_lo_ || j > h_hi) return 0.0;
        return static_cast<double>(N_) *
               (H(static_cast<double>(j + 1) * inv_n) - H(static_cast<double>(j) * inv_n));
    };
    const std::size_t n = static_cast<std::size_t>(j_hi_ - j_lo_ + 1);
    cdrift_.resize(n);
    cqv_.resize(n);
    Kahan gs;
    for (std::int64_t j = j_lo_; j <= j_hi_; ++j) {
        const double gj = grad(j), gjm = grad(j - 1);
        cdrift_[static_cast<std::size_t>(j - j_lo_)] = p * gj - q * gjm;
        cqv_[static_cast<std::size_t>(j - j_lo_)] = p * gj * gj + q * gjm * gjm;
        if (j <= h_hi) gs.add(gj * gj);
    }
    grad_sq_sum_ = gs.value();
    audit(eta);
    max_audit_drift_ = 0.0;
}

void MartingaleObserver::on_hold(double, double ds, const Configuration&) {
    kahan_add(Sd_ * ds, &Dacc_, &Dc_);
    kahan_add(Sq_ * ds, &Qacc_, &Qc_);
}

void MartingaleObserver::on_jump(double, std::int64_t x, std::int64_t y, const Configuration& eta) {
    std::int64_t j;
    if (window_rel(x, origin_, L_, j_lo_, j_hi_, &j)) {
        const double dg = (*g_)(eta.occ(x)) - (*g_)(eta.occ(x) + 1);
        const auto i = static_cast<std::size_t>(j - j_lo_);
        Sd_ += cdrift_[i] * dg;
        Sq_ += cqv_[i] * dg;
    }
    if (window_rel(y, origin_, L_, j_lo_, j_hi_, &j)) {
        const double dg = (*g_)(eta.occ(y)) - (*g_)(eta.occ(y) - 1);
        const auto i = static_cast<std::size_t>(j - j_lo_);
        Sd_ += cdrift_[i] * dg;
        Sq_ += cqv_[i] * dg;
    }
    if (++jumps_ % kAuditEvery == 0) audit(eta);
}

void MartingaleObserver::audit(const Configuration& eta) {
    Kahan sd, sq;
    for (std::int64_t j = j_lo_; j <= j_hi_; ++j) {
        const double gv = (*g_)(eta.occ(mod_ring(origin_ + j, L_)));
        const auto i = static_cast<std::size_t>(j - j_lo_);
        sd.add(cdrift_[i] * gv);
        sq.add(cqv_[i] * gv);
    }
    const double scale = std::max(1.0, std::abs(sq.value()));
    max_audit_drift_ = std::max(max_audit_drift_,
                                std::max(std::abs(sd.value() - Sd_), std::abs(sq.value() - Sq_)) / scale);
    Sd_ = sd.value();
    Sq_ = sq.value();
}

double MartingaleObserver::drift_integral() const {
    return Dacc_ / (static_cast<double>(N_) * std::sqrt(static_cast<double>(N_)));
}

double MartingaleObserver::qv_integral() const {
    const double n = static_cast<double>(N_);
    return Qacc_ / (n * n * n);
}

}  // namespace zrp
