#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/rate_function.hpp"
#include "zrp/rng.hpp"

namespace zrp {

// Microscopic dynamics plus the scaling frame. A site with k particles fires
// at rate g(k); the moving particle steps right with probability p_right.
// Macroscopic time t corresponds to micro time t * N^a.
struct DynamicsSpec {
    RateFunction g = RateFunction::indicator();
    double p_right = 1.0;  // in [1/2, 1]
    double a = 1.0;        // 1 hyperbolic, 1+gamma long scale, 2 diffusive
    std::int64_t N = 1;

    void validate() const;
    double micro_horizon(double t_macro) const;
};

// Observation hooks. Holding intervals arrive before the jump that ends them,
// so piecewise-constant time integrals are exact; checkpoints fire exactly at
// their requested micro times and see the pre-jump state.
class Observer {
public:
    virtual ~Observer() = default;
    virtual void on_hold(double s, double ds, const Configuration& eta) {
        (void)s; (void)ds; (void)eta;
    }
    // jump already applied: one particle moved x -> y at time s
    virtual void on_jump(double s, std::int64_t x, std::int64_t y, const Configuration& eta) {
        (void)s; (void)x; (void)y; (void)eta;
    }
    virtual double next_checkpoint() const { return std::numeric_limits<double>::infinity(); }
    virtual void on_checkpoint(double s, const Configuration& eta) { (void)s; (void)eta; }
};

// Weighted site selection. Constant-rate dynamics keep a dense list of
// occupied sites (O(1) select/update); general rates use a partial-sum binary
// tree (O(log L)), periodically rebuilt so float drift cannot accumulate.
class SiteSampler {
public:
    SiteSampler(const Configuration& eta, const RateFunction& g);

    double total() const;
    std::int64_t select(Rng& rng) const;
    void site_changed(std::int64_t x, std::int32_t occ_now);
    // recompute from scratch; returns the relative drift that had accumulated
    double rebuild(const Configuration& eta);

private:
    const RateFunction* g_;
    bool indicator_;
    // indicator mode
    std::vector<std::int32_t> occupied_;
    std::vector<std::int32_t> position_;  // site -> index in occupied_, -1 if absent
    // weighted mode
    std::int64_t cap_ = 0;
    std::vector<double> tree_;

    void tree_set(std::int64_t leaf, double w);
};

// Event-driven simulation of the ring process.
class Simulation {
public:
    Simulation(std::vector<std::int32_t> occ, DynamicsSpec spec, std::uint64_t seed);

    void add_observer(Observer* obs);  // non-owning; keep alive during evolve

    void evolve_to_micro(double s_end);
    void evolve_to_macro(double t) { evolve_to_micro(spec_.micro_horizon(t)); }

    const Configuration& config() const { return eta_; }
    const DynamicsSpec& spec() const { return spec_; }
    double micro_time() const { return s_; }
    std::uint64_t events() const { return events_; }
    double total_rate() const { return sampler_.total(); }

    double force_rebuild() { return sampler_.rebuild(eta_); }
    double max_rebuild_drift() const { return max_drift_; }

private:
    Configuration eta_;
    DynamicsSpec spec_;
    Rng rng_;
    SiteSampler sampler_;
    std::vector<Observer*> observers_;
    double s_ = 0.0;
    std::uint64_t events_ = 0;
    double max_drift_ = 0.0;

    static constexpr std::uint64_t kRebuildEvery = 1ull << 20;

    void emit_hold(double s, double ds);
    // advances through checkpoints in [s_, limit); holds are emitted on the way
    void run_checkpoints_until(double limit);
};

}  // namespace zrp
