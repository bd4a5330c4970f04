// Command line driver: suite runner plus small utilities for inspecting the
// model (equilibrium samples, hydrodynamic profiles, estimator self-checks).

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zrp/ensemble.hpp"
#include "zrp/parallel.hpp"
#include "zrp/riemann.hpp"
#include "zrp/rng.hpp"
#include "zrp/stats.hpp"
#include "zrp/suite.hpp"

namespace {

int resolve_parallel(const std::string& arg) {
    if (arg == "auto") return static_cast<int>(zrp::auto_threads());
    int n = 0;
    try {
        std::size_t pos = 0;
        n = std::stoi(arg, &pos);
        if (pos != arg.size()) n = 0;
    } catch (const std::exception&) {
        n = 0;
    }
    if (n < 1) throw CLI::ValidationError("--parallel", "expected a positive integer or 'auto'");
    return n;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, const std::string& parallel) {
    const int threads = resolve_parallel(parallel);
    auto entries = zrp::parse_config(config_path);
    auto manifest = zrp::run_suite(entries, out_dir, seed, threads);
    std::printf("config digest %s\n", manifest.config_digest.c_str());
    for (const auto& dir : manifest.experiment_dirs)
        std::printf("  %s\n", dir.c_str());
    std::printf(manifest.all_pass ? "all experiments pass\n" : "FAIL: see reports in %s\n",
                out_dir.c_str());
    return manifest.all_pass ? 0 : 1;
}

int cmd_sample(double rho, std::int64_t sites, std::int64_t count, std::uint64_t seed) {
    std::printf("replica,site,occupancy\n");
    for (std::int64_t r = 0; r < count; ++r) {
        zrp::Rng rng(zrp::derive_seed(seed, "sample", static_cast<std::uint64_t>(r)));
        auto occ = zrp::sample_occupancies(rho, sites, rng);
        for (std::int64_t x = 0; x < sites; ++x)
            std::printf("%" PRId64 ",%" PRId64 ",%d\n", r, x, occ[static_cast<std::size_t>(x)]);
    }
    return 0;
}

int cmd_riemann(double rho_left, double rho_right, double t, std::int64_t points) {
    if (!(t > 0.0)) throw CLI::ValidationError("--t", "time must be positive");
    // The entropy solution of the step problem is self-similar, rho(t, x) =
    // R(x/t), so the table is emitted in xi = x/t. Every wave speed lies in
    // (0, 1); the grid pads that range on both sides.
    const double lo = -0.25, hi = 1.25;
    std::printf("xi,rho\n");
    for (std::int64_t i = 0; i < points; ++i) {
        const double xi =
            points == 1 ? 0.5 * (lo + hi)
                        : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        std::printf("%s,%s\n", zrp::format_double(xi).c_str(),
                    zrp::format_double(zrp::riemann_density(rho_left, rho_right, xi)).c_str());
    }
    return 0;
}

bool check(const char* name, bool ok) {
    std::printf("%-44s %s\n", name, ok ? "pass" : "FAIL");
    return ok;
}

// Calibration battery for the estimators: known distributions in, verdicts out.
int cmd_selftest() {
    bool all = true;
    std::mt19937_64 gen(20260814u);

    std::normal_distribution<double> normal(1.0, 2.0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = normal(gen);
    auto mv = zrp::stats::mean_var(xs);
    all &= check("normal mean within 4 SE", std::abs(mv.mean - 1.0) <= 4.0 * mv.se_mean);
    all &= check("normal variance within 4 SE", std::abs(mv.var - 4.0) <= 4.0 * mv.se_var);
    all &= check("normal draws pass gaussianity", zrp::stats::gaussianity(xs).pass);

    std::exponential_distribution<double> expo(1.0);
    std::vector<double> es(100000);
    for (auto& e : es) e = expo(gen);
    auto gd = zrp::stats::gaussianity(es);
    all &= check("exponential draws fail on skewness",
                 !gd.pass && std::abs(gd.skew) > gd.skew_limit);

    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = 2.0 * xs[i];
    auto cov = zrp::stats::covariance(xs, ys);
    all &= check("cov(x, 2x) = 2 var(x)", std::abs(cov.cov - 2.0 * mv.var) < 1e-9);

    std::vector<double> px, py;
    for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        px.push_back(x);
        py.push_back(7.0 * std::pow(x, -0.8));
    }
    auto fit = zrp::stats::loglog_slope(px, py);
    all &= check("power law slope recovered", std::abs(fit.slope + 0.8) < 1e-12);

    std::vector<double> observed = {52, 48, 55, 45};
    std::vector<double> expected = {50, 50, 50, 50};
    const auto gof = zrp::stats::chi2_gof(observed, expected);
    all &= check("chi-square p in (0.5, 1) for near-uniform", gof.p > 0.5 && gof.p < 1.0);

    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-range interacting particle lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", parallel = "auto";
    std::uint64_t seed = 1;
    auto* run = app.add_subcommand("run", "run an experiment suite from a JSON config");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--parallel", parallel, "worker count or 'auto'");

    double rho = 1.0;
    std::int64_t sites = 16, count = 1;
    std::uint64_t s_seed = 1;
    auto* sample = app.add_subcommand("sample", "dump equilibrium configurations as CSV");
    sample->add_option("--rho", rho, "target density")->check(CLI::NonNegativeNumber);
    sample->add_option("--sites", sites, "ring size")->check(CLI::PositiveNumber);
    sample->add_option("--count", count, "number of configurations")->check(CLI::PositiveNumber);
    sample->add_option("--seed", s_seed, "master seed");

    double rho_left = 0.0, rho_right = 1.0, t = 1.0;
    std::int64_t points = 101;
    auto* riemann = app.add_subcommand("riemann", "closed-form step-profile table as CSV");
    riemann->add_option("--rho-left", rho_left, "density left of the origin")->required();
    riemann->add_option("--rho-right", rho_right, "density right of the origin")->required();
    riemann->add_option("--t", t, "macroscopic time");
    riemann->add_option("--points", points, "table size")->check(CLI::PositiveNumber);

    auto* selftest = app.add_subcommand("selftest", "estimator calibration checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, parallel);
        if (sample->parsed()) return cmd_sample(rho, sites, count, s_seed);
        if (riemann->parsed()) return cmd_riemann(rho_left, rho_right, t, points);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
