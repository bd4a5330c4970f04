#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zrp/experiments.hpp"

namespace zrp {

// One experiment of a suite. `canonical` is the normalized JSON text of the
// entry with every default filled in; the suite digest hashes these, so two
// configs with the same meaning get the same digest.
struct SuiteEntry {
    ExpConfig config;
    std::string canonical;
    std::string name;  // output directory: <index>_<scenario>
};

// Parses a config file: one experiment object or an array of them.
// Unknown keys, wrong types, and out-of-range exponents are rejected with the
// offending key path in the message.
std::vector<SuiteEntry> parse_config(const std::string& path);
std::vector<SuiteEntry> parse_config_text(const std::string& text);

// Compact JSON array of the canonical entries; hashing this gives the digest.
std::string canonical_config_text(const std::vector<SuiteEntry>& entries);

struct RunManifest {
    std::string tool_version;
    std::string config_digest;
    std::uint64_t master_seed = 0;
    std::string seed_rule;
    std::string started_at;   // timestamps live here only, reports stay
    std::string finished_at;  // byte-identical for a fixed (config, seed)
    std::vector<std::string> experiment_dirs;
    bool all_pass = false;
};

// Runs all entries with replica seeds hash(master, label, index); writes
// <out>/<name>/report.json, <out>/<name>/samples.csv and <out>/manifest.json.
// A throwing experiment is recorded as errored and the suite continues.
RunManifest run_suite(const std::vector<SuiteEntry>& entries, const std::string& out_dir,
                      std::uint64_t master_seed, int threads);

// deterministic serializations (shared with the CLI and tests)
std::string report_json(const ExperimentResult& result, const SuiteEntry& entry,
                        std::uint64_t master_seed);
void write_samples_csv(std::ostream& os, const std::vector<SampleRow>& samples);
std::string format_double(double v);  // shortest round-trip decimal

}  // namespace zrp
