#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "zrp/ensemble.hpp"
#include "zrp/experiments.hpp"
#include "zrp/sha256.hpp"
#include "zrp/suite.hpp"

using namespace zrp;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string thrown_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults filled and echoed") {
    auto entries = parse_config_text(R"({"scenario":"current_clt","rho":1.0,"N":500,"t":1.0})");
    REQUIRE(entries.size() == 1);
    const ExpConfig& cfg = entries[0].config;
    CHECK(cfg.R == 256);
    CHECK(cfg.c == 32);
    CHECK(cfg.s == 0.5);
    CHECK(contains(entries[0].canonical, "\"R\":256"));
    CHECK(contains(entries[0].canonical, "\"c\":32"));
    CHECK(entries[0].name == "00_current_clt");
}

TEST_CASE("canonical form is a fixed point of parsing") {
    const std::string text =
        R"([{"scenario":"bg_decay","gamma":0.25,"R":16,"N_list":[64,128,256,512]},)"
        R"({"scenario":"flu2_static","t":1.0,"s":0.5,"H":{"type":"gaussian_bump"}}])";
    auto first = parse_config_text(text);
    const std::string canon = canonical_config_text(first);
    auto second = parse_config_text(canon);
    CHECK(canonical_config_text(second) == canon);
    // digest changes iff the canonical text changes
    CHECK(sha256_hex(canon) == sha256_hex(canonical_config_text(second)));
    auto third = parse_config_text(R"({"scenario":"bg_decay","gamma":0.26})");
    CHECK(sha256_hex(canonical_config_text(third)) != sha256_hex(canon));
}

TEST_CASE("unknown keys are rejected with their path") {
    const std::string msg = thrown_message(
        [] { (void)parse_config_text(R"([{"scenario":"bg_decay","gamma":0.25,"banana":1}])"); });
    CHECK(contains(msg, "$[0].banana"));
    CHECK(contains(msg, "unknown key"));

    const std::string msg2 = thrown_message(
        [] { (void)parse_config_text(R"({"scenario":"hydro","gamma":0.2})"); });
    CHECK(contains(msg2, "$.gamma"));  // gamma is not a hydro knob
}

TEST_CASE("exponent window is enforced unless probing") {
    const std::string msg = thrown_message(
        [] { (void)parse_config_text(R"({"scenario":"bg_decay","gamma":0.5})"); });
    CHECK(contains(msg, "$.gamma"));
    CHECK(contains(msg, "0 < gamma < 1/3"));

    CHECK_NOTHROW((void)parse_config_text(R"({"scenario":"bg_decay","gamma":0.5,"probe":true})"));
    CHECK_THROWS((void)parse_config_text(R"({"scenario":"bg_decay","gamma":1.5,"probe":true})"));
    CHECK_THROWS((void)parse_config_text(R"({"scenario":"symmetric_bg","beta":0.6})"));
}

TEST_CASE("malformed configs fail with useful messages") {
    CHECK(contains(thrown_message([] { (void)parse_config_text("{"); }), "parse error"));
    CHECK(contains(thrown_message([] { (void)parse_config_text(R"({"scenario":"nope"})"); }),
                   "unknown scenario"));
    CHECK(contains(thrown_message([] {
              (void)parse_config_text(R"({"scenario":"current_clt","N":12.5})");
          }),
                   "expected an integer"));
    CHECK(contains(thrown_message([] {
              (void)parse_config_text(R"({"scenario":"current_clt","s":2.0,"t":1.0})");
          }),
                   "[0, t]"));
    CHECK(contains(thrown_message([] { (void)parse_config_text("[]"); }), "empty"));
    CHECK(contains(thrown_message([] {
              (void)parse_config_text(R"({"scenario":"static_field","H":{"type":"box"}})");
          }),
                   "test function"));
}

TEST_CASE("experiment results are identical across worker counts") {
    auto entries = parse_config_text(
        R"([{"scenario":"stationarity","N":64,"c":8,"t":0.5,"R":8},)"
        R"({"scenario":"field_covariance","N":64,"c":26,"t":0.5,"R":24}])");
    for (const auto& entry : entries) {
        const ExperimentResult a = run_experiment(entry.config, 9001, 1);
        const ExperimentResult b = run_experiment(entry.config, 9001, 3);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].name == b.rows[i].name);
            CHECK(a.rows[i].estimate == b.rows[i].estimate);  // bitwise
            CHECK(a.rows[i].se == b.rows[i].se);
        }
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            CHECK(a.samples[i].value == b.samples[i].value);
        CHECK(a.events == b.events);

        // different master seed moves the estimates
        const ExperimentResult c = run_experiment(entry.config, 9002, 1);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            any_diff = any_diff || a.rows[i].estimate != c.rows[i].estimate;
        CHECK(any_diff);
    }
}

TEST_CASE("block variance sweep matches a two-site enumeration") {
    // exact Var of the centered occupied count on K = 2 sites at density 1
    const std::int64_t K = 2;
    double mean = 0.0, second = 0.0;
    for (int n1 = 0; n1 < 64; ++n1) {
        for (int n2 = 0; n2 < 64; ++n2) {
            const double p = std::pow(0.5, n1 + 1) * std::pow(0.5, n2 + 1);
            const double v1 = (n1 > 0 ? 1.0 : 0.0) + (n2 > 0 ? 1.0 : 0.0) -
                              2.0 * canonical_mean_g(K, n1 + n2);
            mean += p * v1;
            second += p * v1 * v1;
        }
    }
    const double exact_var = second - mean * mean;

    ExpConfig cfg;
    cfg.scenario = "block_variances";
    cfg.rho = 1.0;
    cfg.K_list = {2};
    cfg.L_list = {4};
    cfg.R = 60000;
    const ExperimentResult res = run_experiment(cfg, 31337, 1);
    const auto it = std::find_if(res.rows.begin(), res.rows.end(), [](const ReportRow& r) {
        return r.name == "var_v1_per_site[K=2]";
    });
    REQUIRE(it != res.rows.end());
    // estimate is Var(V1)/K; R = 6e4 puts the sampling error near 0.6%
    CHECK(std::abs(it->estimate - exact_var / double(K)) / (exact_var / double(K)) < 0.03);
}

TEST_CASE("scenario preconditions surface as errors") {
    ExpConfig bg;
    bg.scenario = "bg_decay";
    bg.N_list = {64, 128};
    bg.R = 16;
    CHECK(contains(thrown_message([&] { (void)run_experiment(bg, 1, 1); }), "at least 4"));

    ExpConfig sym;
    sym.scenario = "symmetric_bg";
    sym.N_list = {16, 32, 64, 128};
    sym.R = 16;
    sym.t = 0.02;
    sym.p_right = 1.0;  // asymmetric engine fed to the diffusive scenario
    CHECK(contains(thrown_message([&] { (void)run_experiment(sym, 1, 1); }), "symmetric"));

    ExpConfig ramp;
    ramp.scenario = "current_vs_field";
    ramp.N = 64;
    ramp.c = 8;  // ramp window n*N does not fit in half the ring
    ramp.n_list = {2, 4, 8, 16};
    ramp.R = 16;
    CHECK(contains(thrown_message([&] { (void)run_experiment(ramp, 1, 1); }), "ring"));

    ExpConfig bad;
    bad.scenario = "does_not_exist";
    CHECK(contains(thrown_message([&] { (void)run_experiment(bad, 1, 1); }), "unknown scenario"));
}

TEST_CASE("torus factor doubling leaves field statistics alone") {
    // the window only sees the bump support, so doubling c changes nothing
    // but the ring size; estimates agree within joint error bars
    auto run_cov = [](std::int64_t c) {
        ExpConfig cfg;
        cfg.scenario = "field_covariance";
        cfg.N = 64;
        cfg.c = c;
        cfg.t = 0.5;
        cfg.R = 64;
        return run_experiment(cfg, 777, 1);
    };
    const ExperimentResult small = run_cov(26);
    const ExperimentResult big = run_cov(52);
    auto cov_row = [](const ExperimentResult& r) {
        auto it = std::find_if(r.rows.begin(), r.rows.end(),
                               [](const ReportRow& row) { return row.name == "covariance"; });
        REQUIRE(it != r.rows.end());
        return *it;
    };
    const ReportRow rs = cov_row(small), rb = cov_row(big);
    const double joint = std::hypot(rs.se, rb.se);
    CHECK(std::abs(rs.estimate - rb.estimate) <= 4.0 * joint);
}

TEST_CASE("report json carries the full row table and echoes the config") {
    auto entries = parse_config_text(R"({"scenario":"stationarity","N":64,"c":8,"t":0.5,"R":8})");
    const ExperimentResult res = run_experiment(entries[0].config, 4, 1);
    const std::string j = report_json(res, entries[0], 4);
    CHECK(contains(j, "\"scenario\": \"stationarity\""));
    CHECK(contains(j, "\"master_seed\": 4"));
    CHECK(contains(j, "\"rows\""));
    CHECK(contains(j, "\"relation\""));
    CHECK(contains(j, "\"occupancy_chi2_p\""));
    CHECK(contains(j, "\"config\""));
    for (const auto& row : res.rows) {
        CHECK((row.relation == "equals" || row.relation == "at_least" ||
               row.relation == "at_most" || row.relation == "less" || row.relation == "info"));
        if (row.gate) CHECK(row.relation != "info");
    }
}

TEST_CASE("samples stream is sorted, headed, and dot-decimal") {
    auto entries = parse_config_text(R"({"scenario":"stationarity","N":64,"c":8,"t":0.5,"R":8})");
    const ExperimentResult res = run_experiment(entries[0].config, 4, 1);
    std::ostringstream os;
    write_samples_csv(os, res.samples);
    const std::string csv = os.str();
    REQUIRE(csv.substr(0, csv.find('\n')) == "replica,t,observable,label,value");
    CHECK(!contains(csv, "\r"));
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    std::int64_t prev_replica = -1000;
    double prev_t = 0.0;
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const std::int64_t rep = std::stoll(line.substr(0, c1));
        const double t = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        if (rep == prev_replica) CHECK(t >= prev_t);
        CHECK(rep >= prev_replica);
        prev_replica = rep;
        prev_t = t;
    }
    CHECK(rows == static_cast<int>(res.samples.size()));
}
