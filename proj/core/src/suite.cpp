#include "zrp/suite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "zrp/sha256.hpp"

namespace zrp {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "0.1.0";
constexpr const char* kSeedRule =
    "replica seed = sha256(master seed, experiment label, replica index)";

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("config error at " + path + ": " + what);
}

bool verbose() {
    static const bool on = [] {
        const char* v = std::getenv("ZRP_LOG");
        return v != nullptr && *v != '\0' && std::string_view(v) != "0";
    }();
    return on;
}

void log_line(const std::string& msg) {
    if (verbose()) std::fprintf(stderr, "[zrp] %s\n", msg.c_str());
}

std::string now_iso() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- schema -----------------------------------------------------------

// Key types: d double, i integer, A integer array, b bool, F test function.
const std::map<std::string, char>& key_types() {
    static const std::map<std::string, char> t = {
        {"rho", 'd'},    {"rho_left", 'd'}, {"rho_right", 'd'}, {"t", 'd'},
        {"s", 'd'},      {"gamma", 'd'},    {"beta", 'd'},      {"N", 'i'},
        {"R", 'i'},      {"c", 'i'},        {"K_for_L", 'i'},   {"N_list", 'A'},
        {"K_list", 'A'}, {"L_list", 'A'},   {"n_list", 'A'},    {"probe", 'b'},
        {"H", 'F'},      {"G", 'F'},
    };
    return t;
}

struct Schema {
    std::vector<std::string> keys;       // accepted keys beyond "scenario"
    void (*defaults)(ExpConfig&);        // scenario defaults before user values
};

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> reg = {
        {"stationarity",
         {{"rho", "N", "c", "t", "R"},
          [](ExpConfig& c) { c.N = 256; }}},
        {"static_field",
         {{"rho", "N", "R", "H"},
          [](ExpConfig& c) { c.N = 256; }}},
        {"field_covariance",
         {{"rho", "N", "c", "s", "t", "R", "H", "G"},
          [](ExpConfig& c) { c.N = 200; }}},
        {"current_clt",
         {{"rho", "N", "c", "s", "t", "R"},
          [](ExpConfig& c) { c.N = 500; c.s = 0.5; }}},
        {"current_vs_field",
         {{"rho", "N", "c", "t", "n_list", "R"},
          [](ExpConfig& c) { c.N = 128; c.c = 33; c.n_list = {2, 4, 8, 16}; }}},
        {"martingale",
         {{"rho", "N", "c", "t", "R", "H"},
          [](ExpConfig& c) { c.N = 128; }}},
        {"bg_decay",
         {{"rho", "c", "t", "gamma", "N_list", "R", "H", "probe"},
          [](ExpConfig& c) { c.R = 64; c.N_list = {64, 128, 256, 512}; }}},
        {"characteristic_current",
         {{"rho", "c", "t", "gamma", "N_list", "R", "probe"},
          [](ExpConfig& c) {
              c.R = 64;
              c.t = 0.05;
              c.N_list = {64, 128, 256, 512};
          }}},
        {"flu2_static",
         {{"rho", "N", "c", "s", "t", "gamma", "R", "H", "G", "probe"},
          [](ExpConfig& c) { c.N = 128; c.s = 0.5; }}},
        {"symmetric_bg",
         {{"rho", "c", "t", "beta", "N_list", "R", "H"},
          [](ExpConfig& c) {
              c.R = 64;
              c.t = 0.05;
              c.c = 26;  // the default bump spans 12N+1 sites; keep it under L/2
              c.N_list = {64, 128, 256, 512};
              c.p_right = 0.5;
          }}},
        {"block_variances",
         {{"rho", "K_list", "L_list", "K_for_L", "R"},
          [](ExpConfig& c) {
              c.K_list = {8, 16, 32, 64, 128, 256, 512};
              c.L_list = {4, 8, 16, 32, 64};
          }}},
        {"hydro",
         {{"rho_left", "rho_right", "N", "c", "t", "R"},
          [](ExpConfig& c) {
              c.R = 64;
              c.t = 4.0;
              c.rho_left = 0.0;
              c.rho_right = 1.0;
          }}},
    };
    return reg;
}

double read_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::int64_t read_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
}

std::vector<std::int64_t> read_int_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty integer array");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(read_int(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

TestFunction read_fn(const json& v, const std::string& path, json& echo) {
    if (!v.is_object()) fail(path, "expected a test function object");
    for (const auto& [k, _] : v.items()) {
        if (k != "type" && k != "center" && k != "width" && k != "n" && k != "u" &&
            k != "v")
            fail(path + "." + k, "unknown test function key");
    }
    if (!v.contains("type") || !v["type"].is_string())
        fail(path + ".type", "expected a string");
    const std::string type = v["type"].get<std::string>();
    if (type == "gaussian_bump") {
        double center = v.contains("center") ? read_double(v["center"], path + ".center") : 0.0;
        double width = v.contains("width") ? read_double(v["width"], path + ".width") : 1.0;
        if (!(width > 0.0)) fail(path + ".width", "width must be positive");
        echo = json{{"type", "gaussian_bump"}, {"center", center}, {"width", width}};
        return TestFunction::gaussian_bump(center, width);
    }
    if (type == "ramp") {
        if (!v.contains("n")) fail(path + ".n", "ramp needs an integer n");
        std::int64_t n = read_int(v["n"], path + ".n");
        if (n < 1 || n > 4096) fail(path + ".n", "ramp slope must be in [1, 4096]");
        echo = json{{"type", "ramp"}, {"n", n}};
        return TestFunction::ramp(static_cast<int>(n));
    }
    if (type == "tabulated") {
        if (!v.contains("u") || !v.contains("v"))
            fail(path, "tabulated needs arrays u and v");
        std::vector<double> us, vs;
        for (std::size_t i = 0; i < v["u"].size(); ++i)
            us.push_back(read_double(v["u"][i], path + ".u[" + std::to_string(i) + "]"));
        for (std::size_t i = 0; i < v["v"].size(); ++i)
            vs.push_back(read_double(v["v"][i], path + ".v[" + std::to_string(i) + "]"));
        echo = json{{"type", "tabulated"}, {"u", us}, {"v", vs}};
        return TestFunction::tabulated(std::move(us), std::move(vs));
    }
    fail(path + ".type", "unknown test function type \"" + type + "\"");
}

json default_fn_echo() {
    return json{{"type", "gaussian_bump"}, {"center", 0.0}, {"width", 1.0}};
}

// Applies one key to the config and returns the canonical echo value.
json apply_key(ExpConfig& cfg, const std::string& key, const json* user,
               const std::string& path) {
    const char type = key_types().at(key);
    if (type == 'd') {
        double* slot = nullptr;
        if (key == "rho") slot = &cfg.rho;
        else if (key == "rho_left") slot = &cfg.rho_left;
        else if (key == "rho_right") slot = &cfg.rho_right;
        else if (key == "t") slot = &cfg.t;
        else if (key == "s") slot = &cfg.s;
        else if (key == "gamma") slot = &cfg.gamma;
        else if (key == "beta") slot = &cfg.beta;
        if (user) *slot = read_double(*user, path);
        return *slot;
    }
    if (type == 'i') {
        std::int64_t* slot = nullptr;
        if (key == "N") slot = &cfg.N;
        else if (key == "R") slot = &cfg.R;
        else if (key == "c") slot = &cfg.c;
        else if (key == "K_for_L") slot = &cfg.K_for_L;
        if (user) *slot = read_int(*user, path);
        return *slot;
    }
    if (type == 'A') {
        if (key == "n_list") {
            if (user) {
                cfg.n_list.clear();
                for (std::int64_t n : read_int_list(*user, path))
                    cfg.n_list.push_back(static_cast<int>(n));
            }
            return cfg.n_list;
        }
        std::vector<std::int64_t>* slot = nullptr;
        if (key == "N_list") slot = &cfg.N_list;
        else if (key == "K_list") slot = &cfg.K_list;
        else if (key == "L_list") slot = &cfg.L_list;
        if (user) *slot = read_int_list(*user, path);
        return *slot;
    }
    if (type == 'b') {
        if (user) {
            if (!user->is_boolean()) fail(path, "expected a boolean");
            cfg.probe = user->get<bool>();
        }
        return cfg.probe;
    }
    // test function
    json echo = default_fn_echo();
    TestFunction fn = TestFunction::gaussian_bump(0.0, 1.0);
    if (user) fn = read_fn(*user, path, echo);
    if (key == "H") cfg.H = fn;
    else cfg.G = fn;
    return echo;
}

void check_ranges(const ExpConfig& cfg, const std::string& path) {
    auto at = [&](const char* key) { return path + "." + key; };
    if (!(cfg.rho >= 0.0) || !std::isfinite(cfg.rho)) fail(at("rho"), "density must be finite and nonnegative");
    if (cfg.N < 2) fail(at("N"), "ring needs at least two sites");
    if (cfg.R < 2) fail(at("R"), "need at least two replicas");
    if (cfg.c < 1) fail(at("c"), "torus factor must be positive");
    if (!(cfg.t > 0.0) || !std::isfinite(cfg.t)) fail(at("t"), "horizon must be positive");
    if (cfg.s < 0.0 || cfg.s > cfg.t) fail(at("s"), "intermediate time must lie in [0, t]");
    if (cfg.K_for_L < 1) fail(at("K_for_L"), "inner block length must be positive");
    for (const auto& [key, list] :
         {std::pair<const char*, const std::vector<std::int64_t>*>{"N_list", &cfg.N_list},
          {"K_list", &cfg.K_list},
          {"L_list", &cfg.L_list}}) {
        for (std::size_t i = 0; i + 1 < list->size(); ++i)
            if ((*list)[i] >= (*list)[i + 1]) fail(at(key), "must be strictly increasing");
        if (!list->empty() && list->front() < 1) fail(at(key), "entries must be positive");
    }
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        if (cfg.n_list[i] < 1) fail(at("n_list"), "entries must be positive");
        if (i + 1 < cfg.n_list.size() && cfg.n_list[i] >= cfg.n_list[i + 1])
            fail(at("n_list"), "must be strictly increasing");
    }
    const bool uses_gamma = cfg.scenario == "bg_decay" ||
                            cfg.scenario == "characteristic_current" ||
                            cfg.scenario == "flu2_static";
    if (uses_gamma) {
        const bool in_window = cfg.gamma > 0.0 && cfg.gamma < 1.0 / 3.0;
        const bool probeable = cfg.gamma > 0.0 && cfg.gamma <= 1.0;
        if (!in_window && !(cfg.probe && probeable))
            fail(at("gamma"), "the long-scale window needs 0 < gamma < 1/3; "
                              "set \"probe\": true to explore up to 1");
    }
    if (cfg.scenario == "symmetric_bg") {
        if (!(cfg.beta > 0.0 && cfg.beta < 0.5))
            fail(at("beta"), "the diffusive window needs 0 < beta < 1/2");
    }
    if (cfg.scenario == "hydro") {
        if (!(cfg.rho_left >= 0.0) || !(cfg.rho_right >= 0.0))
            fail(at("rho_left"), "densities must be nonnegative");
        if (cfg.rho_left == cfg.rho_right)
            fail(at("rho_right"), "step densities must differ");
    }
}

SuiteEntry parse_entry(const json& obj, const std::string& path, std::size_t index) {
    if (!obj.is_object()) fail(path, "expected an experiment object");
    if (!obj.contains("scenario") || !obj["scenario"].is_string())
        fail(path + ".scenario", "expected a scenario name string");
    const std::string scenario = obj["scenario"].get<std::string>();
    auto it = schemas().find(scenario);
    if (it == schemas().end()) {
        std::string known;
        for (const auto& [name, _] : schemas()) known += (known.empty() ? "" : ", ") + name;
        fail(path + ".scenario", "unknown scenario \"" + scenario + "\" (known: " + known + ")");
    }
    const Schema& schema = it->second;
    for (const auto& [key, _] : obj.items()) {
        if (key == "scenario") continue;
        if (std::find(schema.keys.begin(), schema.keys.end(), key) == schema.keys.end())
            fail(path + "." + key, "unknown key for scenario \"" + scenario + "\"");
    }

    SuiteEntry entry;
    entry.config.scenario = scenario;
    schema.defaults(entry.config);

    json canon;
    canon["scenario"] = scenario;
    for (const std::string& key : schema.keys) {
        const json* user = obj.contains(key) ? &obj[key] : nullptr;
        canon[key] = apply_key(entry.config, key, user, path + "." + key);
    }
    check_ranges(entry.config, path);

    entry.canonical = canon.dump();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu_", index);
    entry.name = buf + scenario;
    return entry;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

json row_json(const ReportRow& r) {
    json j;
    j["name"] = r.name;
    j["estimate"] = r.estimate;
    j["se"] = r.se;
    j["target"] = r.target;
    j["relation"] = r.relation;
    j["z"] = r.z;
    j["gate"] = r.gate;
    j["pass"] = r.pass;
    return j;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("short write to " + p.string());
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<SuiteEntry> parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    std::vector<SuiteEntry> entries;
    if (root.is_array()) {
        if (root.empty()) fail("$", "config array is empty");
        for (std::size_t i = 0; i < root.size(); ++i)
            entries.push_back(parse_entry(root[i], "$[" + std::to_string(i) + "]", i));
    } else {
        entries.push_back(parse_entry(root, "$", 0));
    }
    return entries;
}

std::vector<SuiteEntry> parse_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string canonical_config_text(const std::vector<SuiteEntry>& entries) {
    std::string out = "[";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ',';
        out += entries[i].canonical;
    }
    out += ']';
    return out;
}

std::string report_json(const ExperimentResult& result, const SuiteEntry& entry,
                        std::uint64_t master_seed) {
    json j;
    j["scenario"] = result.scenario;
    j["config"] = json::parse(entry.canonical);
    j["master_seed"] = master_seed;
    j["events"] = result.events;
    j["pass"] = result.pass;
    json rows = json::array();
    for (const ReportRow& r : result.rows) rows.push_back(row_json(r));
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

void write_samples_csv(std::ostream& os, const std::vector<SampleRow>& samples) {
    std::vector<const SampleRow*> order;
    order.reserve(samples.size());
    for (const SampleRow& s : samples) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const SampleRow* a, const SampleRow* b) {
        if (a->replica != b->replica) return a->replica < b->replica;
        return a->t < b->t;
    });
    os << "replica,t,observable,label,value\n";
    for (const SampleRow* s : order) {
        os << s->replica << ',' << format_double(s->t) << ',' << csv_field(s->observable)
           << ',' << csv_field(s->label) << ',' << format_double(s->value) << '\n';
    }
}

RunManifest run_suite(const std::vector<SuiteEntry>& entries, const std::string& out_dir,
                      std::uint64_t master_seed, int threads) {
    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.master_seed = master_seed;
    manifest.seed_rule = kSeedRule;
    manifest.config_digest = sha256_hex(canonical_config_text(entries));

    fs::create_directories(out_dir);
    manifest.started_at = now_iso();
    bool all = true;

    json exps = json::array();
    for (const SuiteEntry& entry : entries) {
        const fs::path dir = fs::path(out_dir) / entry.name;
        fs::create_directories(dir);
        log_line(entry.name + ": start");
        json meta;
        meta["dir"] = entry.name;
        meta["scenario"] = entry.config.scenario;
        try {
            ExperimentResult result = run_experiment(entry.config, master_seed, threads);
            write_text(dir / "report.json", report_json(result, entry, master_seed));
            std::ofstream css(dir / "samples.csv", std::ios::binary);
            write_samples_csv(css, result.samples);
            all = all && result.pass;
            meta["status"] = result.pass ? "pass" : "fail";
            log_line(entry.name + (result.pass ? ": pass" : ": FAIL"));
        } catch (const std::exception& e) {
            json err;
            err["scenario"] = entry.config.scenario;
            err["config"] = json::parse(entry.canonical);
            err["master_seed"] = master_seed;
            err["error"] = std::string(e.what());
            err["pass"] = false;
            write_text(dir / "report.json", err.dump(2) + "\n");
            write_text(dir / "samples.csv", "replica,t,observable,label,value\n");
            all = false;
            meta["status"] = "error";
            log_line(entry.name + ": ERROR " + e.what());
        }
        manifest.experiment_dirs.push_back(entry.name);
        exps.push_back(meta);
    }
    manifest.finished_at = now_iso();
    manifest.all_pass = all;

    json m;
    m["tool_version"] = manifest.tool_version;
    m["config_digest"] = manifest.config_digest;
    m["master_seed"] = manifest.master_seed;
    m["seed_rule"] = manifest.seed_rule;
    m["started_at"] = manifest.started_at;
    m["finished_at"] = manifest.finished_at;
    m["experiments"] = exps;
    m["all_pass"] = manifest.all_pass;
    write_text(fs::path(out_dir) / "manifest.json", m.dump(2) + "\n");
    return manifest;
}

}  // namespace zrp
