// Verdict battery. Each criterion prints exactly one PASS/FAIL line with the
// key numbers; tolerances are pinned here and in the experiment gates.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "zrp/ensemble.hpp"
#include "zrp/experiments.hpp"
#include "zrp/suite.hpp"

using namespace zrp;

namespace {

constexpr std::uint64_t kSeed = 20260814ull;

void verdict(int k, bool ok, const std::string& detail) {
    std::printf("criterion %02d: %s  %s\n", k, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

const ReportRow& row(const ExperimentResult& r, const std::string& name) {
    for (const auto& x : r.rows)
        if (x.name == name) return x;
    throw std::runtime_error("missing report row " + name + " in " + r.scenario);
}

bool prefixed_rows_pass(const ExperimentResult& r, const std::string& prefix, int* count = nullptr) {
    bool ok = true;
    int n = 0;
    for (const auto& x : r.rows) {
        if (x.name.rfind(prefix, 0) == 0 && x.gate) {
            ok = ok && x.pass;
            ++n;
        }
    }
    if (count) *count = n;
    return ok && n > 0;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double enumerated_mean_g(std::int64_t K, std::int64_t n, const RateFunction& g) {
    double wsum = 0.0, gsum = 0.0;
    std::vector<std::int64_t> occ(static_cast<std::size_t>(K), 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t site, std::int64_t left) {
        if (site + 1 == occ.size()) {
            occ[site] = left;
            double w = 1.0;
            for (auto k : occ)
                for (std::int64_t j = 1; j <= k; ++j) w /= g(j);
            wsum += w;
            gsum += w * g(occ[0]);
            return;
        }
        for (std::int64_t k = 0; k <= left; ++k) {
            occ[site] = k;
            rec(site + 1, left - k);
        }
    };
    rec(0, n);
    return gsum / wsum;
}

}  // namespace

TEST_CASE("acceptance battery") {
    // ---- 1: exact statics oracles ------------------------------------
    {
        bool ok = flux(0.0) == 0.0 && flux(1.0) == 0.5 && flux(3.0) == 0.75;
        ok = ok && flux_derivative(0.0) == 1.0 && flux_derivative(1.0) == 0.25 &&
             std::abs(flux_derivative(3.0) - 1.0 / 16.0) < 1e-15;
        ok = ok && occupancy_variance(0.0) == 0.0 && occupancy_variance(1.0) == 2.0 &&
             occupancy_variance(3.0) == 12.0;
        for (double rho : {0.05, 0.5, 1.0, 2.0, 5.0, 20.0}) {
            const Statics st = solve_statics(rho);
            ok = ok && std::abs(st.variance * st.flux_deriv - st.fugacity) <= 1e-12;
        }
        const RateFunction ind = RateFunction::indicator();
        const RateFunction gen =
            RateFunction::from_table({0.0, 1.0, 1.7, 2.2, 2.6, 2.6, 2.6, 2.6, 2.6});
        for (std::int64_t K = 1; K <= 5 && ok; ++K)
            for (std::int64_t n = 0; n <= 8 && ok; ++n) {
                ok = std::abs(canonical_mean_g(K, n) - enumerated_mean_g(K, n, ind)) < 1e-12;
                ok = ok &&
                     std::abs(canonical_mean_g(K, n, gen) - enumerated_mean_g(K, n, gen)) < 1e-10;
            }
        ok = ok && ensemble_equivalence_gap(2, 2) == 1.0 / 6.0;
        for (std::int64_t K = 2; K <= 4096; K *= 2) {
            const double kg = double(K) * ensemble_equivalence_gap(K, K);
            ok = ok && kg > 0.0 && kg <= 0.5;
        }
        const double sigma4 = 4.0;
        const double k2m4 = 4096.0 * 4096.0 * block_mean_fourth_moment(4096, 1.0);
        ok = ok && std::abs(k2m4 / (3.0 * sigma4) - 1.0) < 0.01;
        verdict(1, ok, "closed forms, canonical enumeration, block moments (K^2 m4 = " +
                           fmt(k2m4) + " vs 12)");
        CHECK(ok);
    }

    // ---- 2: equilibrium is invariant under the dynamics ----------------
    {
        ExpConfig cfg;
        cfg.scenario = "stationarity";
        cfg.N = 256;
        cfg.c = 32;
        cfg.t = 1.0;
        cfg.R = 16;
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& p = row(r, "occupancy_chi2_p");
        const auto& j = row(r, "bond_current_rate");
        verdict(2, p.pass && j.pass,
                "occupancy chi2 p = " + fmt(p.estimate) + ", bond rate = " + fmt(j.estimate) +
                    " vs 0.5 (z = " + fmt(j.z) + ")");
        CHECK(p.pass);
        CHECK(j.pass);
    }

    // ---- 3: static field variance ------------------------------------
    {
        ExpConfig cfg;
        cfg.scenario = "static_field";
        cfg.N = 256;
        cfg.R = 10000;
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& v = row(r, "field_variance");
        verdict(3, v.pass, "Var Y(H) = " + fmt(v.estimate) + " vs " + fmt(v.target) +
                               " (z = " + fmt(v.z) + ")");
        CHECK(v.pass);
    }

    // ---- 4: two-time field covariance travels with the frame -----------
    {
        ExpConfig cfg;
        cfg.scenario = "field_covariance";
        cfg.N = 200;
        cfg.c = 26;
        cfg.s = 0.0;
        cfg.t = 1.0;
        cfg.R = 256;
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& cv = row(r, "covariance");
        verdict(4, cv.pass, "E[Y_t Y_s] = " + fmt(cv.estimate) + " vs " + fmt(cv.target) +
                                " (z = " + fmt(cv.z) + ")");
        CHECK(cv.pass);
    }

    // ---- 5: net current obeys a CLT ------------------------------------
    {
        ExpConfig cfg;
        cfg.scenario = "current_clt";
        cfg.N = 500;
        cfg.c = 16;
        cfg.t = 1.0;
        cfg.s = 0.5;
        cfg.R = 1024;
        const auto r = run_experiment(cfg, kSeed, 1);
        const bool ok = row(r, "var_Z").pass && row(r, "mean_J_over_N").pass &&
                        row(r, "z_abs_skew").pass && row(r, "z_abs_excess_kurtosis").pass &&
                        row(r, "z_ks_distance").pass && row(r, "cov_Z_mid_end").pass;
        verdict(5, ok, "Var Z = " + fmt(row(r, "var_Z").estimate) + " vs 0.5, mean J/N = " +
                           fmt(row(r, "mean_J_over_N").estimate) + ", cov(Z_0.5, Z_1) = " +
                           fmt(row(r, "cov_Z_mid_end").estimate) + " vs 0.25, normality ok");
        CHECK(ok);
    }

    // ---- 6: current merges with the field along ramps -------------------
    {
        ExpConfig cfg;
        cfg.scenario = "current_vs_field";
        cfg.N = 128;
        cfg.c = 33;
        cfg.t = 1.0;
        cfg.n_list = {2, 4, 8, 16};
        cfg.R = 1024;
        const auto r = run_experiment(cfg, kSeed, 1);
        int drops = 0;
        const bool chain = prefixed_rows_pass(r, "sq_diff_drop[", &drops);
        const auto& ratio = row(r, "sq_diff_final_over_initial");
        verdict(6, chain && ratio.pass,
                "squared difference falls over n = 2..16, final/initial = " + fmt(ratio.estimate));
        CHECK(chain);
        CHECK(ratio.pass);
    }

    // ---- 7: field martingale and its compensator ------------------------
    {
        ExpConfig cfg;
        cfg.scenario = "martingale";
        cfg.N = 128;
        cfg.c = 26;
        cfg.t = 1.0;
        cfg.R = 1024;
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& iso = row(r, "m2_minus_qv");
        const auto& qv = row(r, "qv_mean");
        verdict(7, iso.pass && qv.pass,
                "E[M^2] - E[QV] = " + fmt(iso.estimate) + " (z = " + fmt(iso.z) + "), E[QV] = " +
                    fmt(qv.estimate) + " vs " + fmt(qv.target));
        CHECK(iso.pass);
        CHECK(qv.pass);
    }

    // ---- 8: additive functional decays at the long scale ----------------
    {
        ExpConfig cfg;
        cfg.scenario = "bg_decay";
        cfg.gamma = 0.25;
        cfg.t = 1.0;
        cfg.c = 28;
        cfg.R = 64;
        cfg.N_list = {64, 128, 256, 512};
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& a = row(r, "alpha");
        const auto& gap = row(r, "alpha_gap_vs_control");
        verdict(8, a.pass && gap.pass,
                "alpha = " + fmt(a.estimate) + " +- " + fmt(a.se) + " vs 2/3, control alpha = " +
                    fmt(row(r, "alpha_control").estimate));
        CHECK(a.pass);
        CHECK(gap.pass);
    }

    // ---- 9 and 14: current along the characteristic ----------------------
    {
        ExpConfig cfg;
        cfg.scenario = "characteristic_current";
        cfg.gamma = 0.25;
        cfg.t = 0.05;
        cfg.c = 16;
        cfg.R = 1024;
        cfg.N_list = {64, 128, 256, 512};
        cfg.probe = true;
        const auto r = run_experiment(cfg, kSeed, 1);
        int drops = 0;
        const bool chain = prefixed_rows_pass(r, "v_drop[", &drops);
        const auto& fin = row(r, "v_final_over_initial");
        const auto& ctrl = row(r, "control_final_over_initial");
        verdict(9, chain && fin.pass && ctrl.pass,
                "E[(J/sqrt N)^2] final/initial = " + fmt(fin.estimate) +
                    " (control stays at " + fmt(ctrl.estimate) + ")");
        CHECK(chain);
        CHECK(fin.pass);
        CHECK(ctrl.pass);

        const auto& theta = row(r, "theta_growth");
        verdict(14, true, "informational: Var J_char(T) ~ T^theta with theta = " +
                              fmt(theta.estimate) + " (KPZ scaling predicts 2/3)");
    }

    // ---- 10: second-order fluctuation covariances -----------------------
    {
        ExpConfig cfg;
        cfg.scenario = "flu2_static";
        cfg.N = 128;
        cfg.c = 28;
        cfg.gamma = 0.25;
        cfg.s = 0.5;
        cfg.t = 1.0;
        cfg.R = 8192;
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& c0 = row(r, "cov_0_t");
        const auto& cs = row(r, "cov_s_t");
        const auto& gap = row(r, "cov_pair_gap");
        verdict(10, c0.pass && cs.pass && gap.pass,
                "cov(0,t) = " + fmt(c0.estimate) + ", cov(s,t) = " + fmt(cs.estimate) + " vs " +
                    fmt(c0.target) + " within 5%, pair gap z = " + fmt(gap.z));
        CHECK(c0.pass);
        CHECK(cs.pass);
        CHECK(gap.pass);
    }

    // ---- 11: canonical block estimators stay CLT-scaled ------------------
    {
        ExpConfig cfg;
        cfg.scenario = "block_variances";
        cfg.R = 20000;
        cfg.K_list = {8, 16, 32, 64, 128, 256, 512};
        cfg.L_list = {4, 8, 16, 32, 64};
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& v1 = row(r, "var_v1_max_over_min");
        const auto& v2 = row(r, "var_v2_max_over_min");
        verdict(11, v1.pass && v2.pass, "Var(V1)/K spread = " + fmt(v1.estimate) +
                                            ", Var(V2)/L spread = " + fmt(v2.estimate) +
                                            " (both <= 3)");
        CHECK(v1.pass);
        CHECK(v2.pass);
    }

    // ---- 12: diffusive-scale decay for the symmetric walk ----------------
    {
        ExpConfig cfg;
        cfg.scenario = "symmetric_bg";
        cfg.p_right = 0.5;
        cfg.t = 0.05;
        cfg.c = 26;
        cfg.R = 64;
        cfg.N_list = {64, 128, 256, 512};
        const auto r = run_experiment(cfg, kSeed, 1);
        const auto& a = row(r, "alpha");
        verdict(12, a.pass, "alpha = " + fmt(a.estimate) + " +- " + fmt(a.se) + " vs 1");
        CHECK(a.pass);
    }

    // ---- 13: hydrodynamic step profiles ----------------------------------
    {
        ExpConfig fan;
        fan.scenario = "hydro";
        fan.rho_left = 1.0;
        fan.rho_right = 0.0;
        fan.N = 256;
        fan.c = 32;
        fan.t = 4.0;
        fan.R = 64;
        const auto rf = run_experiment(fan, kSeed, 1);
        const auto& drop = row(rf, "l1_error_drop");

        ExpConfig shock;
        shock.scenario = "hydro";
        shock.rho_left = 0.0;
        shock.rho_right = 1.0;
        shock.N = 256;
        shock.c = 32;
        shock.t = 4.0;
        shock.R = 64;
        const auto rs = run_experiment(shock, kSeed, 1);
        const auto& speed = row(rs, "front_speed");
        verdict(13, drop.pass && speed.pass,
                "fan L1 error drops on N-doubling (" + fmt(drop.estimate) + " < " +
                    fmt(drop.target) + "), shock speed = " + fmt(speed.estimate) +
                    " vs 0.5 (z = " + fmt(speed.z) + ")");
        CHECK(drop.pass);
        CHECK(speed.pass);
    }

    // ---- 15: bit-for-bit reproducibility across worker counts ------------
    {
        namespace fs = std::filesystem;
        const std::string text =
            R"([{"scenario":"stationarity","N":64,"c":8,"t":0.5,"R":8},)"
            R"({"scenario":"field_covariance","N":64,"c":26,"t":0.5,"R":24},)"
            R"({"scenario":"block_variances","K_list":[2,4],"L_list":[4],"R":4000}])";
        const auto entries = parse_config_text(text);
        const fs::path work = fs::path("acceptance_work");
        fs::remove_all(work);
        const auto ma = run_suite(entries, (work / "a").string(), kSeed, 1);
        const auto mb = run_suite(entries, (work / "b").string(), kSeed, 3);
        bool same = ma.config_digest == mb.config_digest;
        for (const auto& dir : ma.experiment_dirs) {
            for (const char* f : {"report.json", "samples.csv"}) {
                std::ifstream fa(work / "a" / dir / f, std::ios::binary);
                std::ifstream fb(work / "b" / dir / f, std::ios::binary);
                std::stringstream sa, sb;
                sa << fa.rdbuf();
                sb << fb.rdbuf();
                same = same && !sa.str().empty() && sa.str() == sb.str();
            }
        }
        verdict(15, same, "reports and sample streams byte-identical for workers 1 vs 3");
        CHECK(same);
    }
}
