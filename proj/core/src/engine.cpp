#include "zrp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zrp {

void DynamicsSpec::validate() const {
    if (!(p_right >= 0.5 && p_right <= 1.0))
        throw std::invalid_argument("p_right must lie in [1/2, 1]");
    if (!(a == 1.0 || (a > 1.0 && a <= 2.0)))
        throw std::invalid_argument("time scale exponent must be 1 or in (1, 2]");
    if (N < 1) throw std::invalid_argument("scaling parameter N must be >= 1");
}

double DynamicsSpec::micro_horizon(double t_macro) const {
    if (!(t_macro >= 0.0)) throw std::invalid_argument("negative time horizon");
    return t_macro * std::pow(static_cast<double>(N), a);
}

// ---- SiteSampler ----

SiteSampler::SiteSampler(const Configuration& eta, const RateFunction& g)
    : g_(&g), indicator_(g.is_indicator()) {
    const std::int64_t L = eta.L();
    if (indicator_) {
        position_.assign(static_cast<std::size_t>(L), -1);
        occupied_.reserve(static_cast<std::size_t>(L));
    } else {
        cap_ = 1;
        while (cap_ < L) cap_ <<= 1;
        tree_.assign(static_cast<std::size_t>(2 * cap_), 0.0);
    }
    rebuild(eta);
}

void SiteSampler::tree_set(std::int64_t leaf, double w) {
    std::int64_t i = cap_ + leaf;
    tree_[static_cast<std::size_t>(i)] = w;
    for (i >>= 1; i >= 1; i >>= 1) {
        tree_[static_cast<std::size_t>(i)] =
            tree_[static_cast<std::size_t>(2 * i)] + tree_[static_cast<std::size_t>(2 * i + 1)];
    }
}

double SiteSampler::total() const {
    if (indicator_) return static_cast<double>(occupied_.size());
    return tree_[1];
}

std::int64_t SiteSampler::select(Rng& rng) const {
    if (indicator_) {
        return occupied_[rng.below(occupied_.size())];
    }
    double u = rng.u01() * tree_[1];
    std::int64_t i = 1;
    while (i < cap_) {
        const double left = tree_[static_cast<std::size_t>(2 * i)];
        if (u < left) {
            i = 2 * i;
        } else {
            u -= left;
            i = 2 * i + 1;
        }
    }
    std::int64_t site = i - cap_;
    // float edges can land on a zero-weight leaf; step back to a live one
    while (site > 0 && tree_[static_cast<std::size_t>(cap_ + site)] == 0.0) --site;
    while (tree_[static_cast<std::size_t>(cap_ + site)] == 0.0) ++site;
    return site;
}

void SiteSampler::site_changed(std::int64_t x, std::int32_t occ_now) {
    if (indicator_) {
        auto& pos = position_[static_cast<std::size_t>(x)];
        const bool listed = pos >= 0;
        const bool should = occ_now > 0;
        if (should && !listed) {
            pos = static_cast<std::int32_t>(occupied_.size());
            occupied_.push_back(static_cast<std::int32_t>(x));
        } else if (!should && listed) {
            const std::int32_t last = occupied_.back();
            occupied_[static_cast<std::size_t>(pos)] = last;
            position_[static_cast<std::size_t>(last)] = pos;
            occupied_.pop_back();
            pos = -1;
        }
        return;
    }
    tree_set(x, (*g_)(occ_now));
}

double SiteSampler::rebuild(const Configuration& eta) {
    const double before = tree_.empty() && occupied_.empty() ? 0.0 : total();
    if (indicator_) {
        occupied_.clear();
        std::fill(position_.begin(), position_.end(), -1);
        for (std::int64_t x = 0; x < eta.L(); ++x) {
            if (eta.occ(x) > 0) {
                position_[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(occupied_.size());
                occupied_.push_back(static_cast<std::int32_t>(x));
            }
        }
    } else {
        for (std::int64_t x = 0; x < eta.L(); ++x) {
            tree_[static_cast<std::size_t>(cap_ + x)] = (*g_)(eta.occ(x));
        }
        for (std::int64_t x = eta.L(); x < cap_; ++x) {
            tree_[static_cast<std::size_t>(cap_ + x)] = 0.0;
        }
        for (std::int64_t i = cap_ - 1; i >= 1; --i) {
            tree_[static_cast<std::size_t>(i)] =
                tree_[static_cast<std::size_t>(2 * i)] + tree_[static_cast<std::size_t>(2 * i + 1)];
        }
    }
    const double after = total();
    const double scale = std::max(1.0, std::abs(after));
    return std::abs(after - before) / scale;
}

// ---- Simulation ----

Simulation::Simulation(std::vector<std::int32_t> occ, DynamicsSpec spec, std::uint64_t seed)
    : eta_(std::move(occ)), spec_(std::move(spec)), rng_(seed), sampler_(eta_, spec_.g) {
    spec_.validate();
}

void Simulation::add_observer(Observer* obs) { observers_.push_back(obs); }

void Simulation::emit_hold(double s, double ds) {
    if (ds <= 0.0) return;
    for (Observer* obs : observers_) obs->on_hold(s, ds, eta_);
}

void Simulation::run_checkpoints_until(double limit) {
    for (;;) {
        double next = std::numeric_limits<double>::infinity();
        for (const Observer* obs : observers_) next = std::min(next, obs->next_checkpoint());
        if (!(next <= limit)) return;
        emit_hold(s_, next - s_);
        s_ = std::max(s_, next);
        for (Observer* obs : observers_) {
            while (obs->next_checkpoint() <= next) obs->on_checkpoint(next, eta_);
        }
    }
}

void Simulation::evolve_to_micro(double s_end) {
    if (s_end < s_) throw std::invalid_argument("time must not run backwards");
    while (true) {
        const double rate = sampler_.total();
        if (rate <= 0.0) {
            // frozen state: drain remaining checkpoints, advance the clock
            run_checkpoints_until(s_end);
            emit_hold(s_, s_end - s_);
            s_ = s_end;
            return;
        }
        const double s_next = s_ + rng_.exponential(rate);
        if (s_next > s_end) {
            // memoryless: the partial wait carries no state worth keeping
            run_checkpoints_until(s_end);
            emit_hold(s_, s_end - s_);
            s_ = s_end;
            return;
        }
        run_checkpoints_until(s_next);
        emit_hold(s_, s_next - s_);
        s_ = s_next;

        const std::int64_t x = sampler_.select(rng_);
        const bool right =
            spec_.p_right >= 1.0 ? true : (rng_.u01() < spec_.p_right);
        const std::int64_t y = right ? eta_.right_of(x) : eta_.left_of(x);
        eta_.move(x, y);
        sampler_.site_changed(x, eta_.occ(x));
        sampler_.site_changed(y, eta_.occ(y));
        ++events_;
        for (Observer* obs : observers_) obs->on_jump(s_, x, y, eta_);

        if (events_ % kRebuildEvery == 0) {
            max_drift_ = std::max(max_drift_, sampler_.rebuild(eta_));
        }
    }
}

}  // namespace zrp
