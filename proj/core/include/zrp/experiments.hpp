#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrp/rate_function.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

// One scenario invocation. Fields not used by a scenario are ignored by it;
// the config parser rejects keys a scenario does not accept.
struct ExpConfig {
    std::string scenario;
    double rho = 1.0;
    double rho_left = 1.0;   // hydro step data
    double rho_right = 0.0;
    std::int64_t N = 256;
    std::vector<std::int64_t> N_list;
    double gamma = 0.25;
    double t = 1.0;
    double s = 0.0;
    std::int64_t R = 256;
    std::int64_t c = 32;     // ring sites per macroscopic unit, L = c N
    std::vector<int> n_list;              // ramp lengths
    std::vector<std::int64_t> K_list;     // block sweep
    std::vector<std::int64_t> L_list;     // superblock sweep (K fixed at K_for_L)
    std::int64_t K_for_L = 8;
    double p_right = 1.0;    // engine asymmetry; the symmetric scenario sets 1/2
    double beta = 0.25;      // diffusive-window exponent, recorded only
    bool probe = false;      // allow exponents outside proven ranges / KPZ probe
    TestFunction H = TestFunction::gaussian_bump(0.0, 1.0);
    TestFunction G = TestFunction::gaussian_bump(0.0, 1.0);
};

// One verdict or informational line of a report.
struct ReportRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;         // 0 when not applicable
    double target = 0.0;     // value or bound; 0 when not applicable
    std::string relation;    // "equals" | "at_least" | "at_most" | "less" | "info"
    double z = 0.0;          // (estimate - target)/se when se > 0
    bool gate = false;       // participates in the pass verdict
    bool pass = true;
};

// Raw per-replica values for the CSV stream.
struct SampleRow {
    std::int64_t replica = 0;
    double t = 0.0;
    std::string observable;
    std::string label;
    double value = 0.0;
};

struct ExperimentResult {
    std::string scenario;
    std::vector<ReportRow> rows;
    std::vector<SampleRow> samples;
    std::uint64_t events = 0;
    bool pass = true;  // conjunction of gate rows

    void finish();     // recompute pass from rows
};

// Scenario runners. Replica r of scenario with work label `lbl` draws its rng
// seed from hash(master, lbl, r), so results are independent of thread count.
ExperimentResult exp_stationarity(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_static_field(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_field_covariance(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_current_clt(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_current_vs_field(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_martingale(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_bg_decay(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_characteristic_current(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_flu2_static(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_symmetric_bg(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_block_variances(const ExpConfig&, std::uint64_t master, int threads);
ExperimentResult exp_hydro(const ExpConfig&, std::uint64_t master, int threads);

// Dispatch by ExpConfig::scenario; throws on unknown scenario names.
ExperimentResult run_experiment(const ExpConfig&, std::uint64_t master, int threads);

}  // namespace zrp
