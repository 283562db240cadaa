#include "hetnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/ppp.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

using json = nlohmann::json;

const char* mode_name(AssocMode m) { return m == AssocMode::crossing ? "crossing" : "noncrossing"; }

AssocMode parse_mode(const std::string& s) {
    if (s == "noncrossing") return AssocMode::noncrossing;
    if (s == "crossing") return AssocMode::crossing;
    throw ConfigError("unknown association mode '" + s + "' (noncrossing|crossing)");
}

namespace {

// Table II; intensities 1:10:50:100.
std::vector<TierSpec> table2_tiers() {
    return {
        {1, 1.0e-6, 40.0, kNeverContends, 30.0, Rat::l_primary},
        {2, 1.0e-5, 1.0, 2.0, 30.0, Rat::l_primary},
        {3, 5.0e-5, 0.5, 2.0, 30.0, Rat::l_primary},
        {4, 1.0e-4, 0.2, 1.0, 30.0, Rat::u_only},
    };
}

ChannelParams table2_channel() {
    ChannelParams ch;
    ch.alpha = 4.0;
    ch.shadowing_sigma_db = std::sqrt(3.0);
    ch.gate_threshold = 4.481;
    ch.sir_threshold = 0.5;
    return ch;
}

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(std::pow(10.0, n == 1 ? a : a + (b - a) * i / (n - 1)));
    return g;
}

Scenario table2_scenario(const std::string& name, AssocMode mode) {
    Scenario s;
    s.name = name;
    s.channel = table2_channel();
    s.tiers = table2_tiers();
    s.modes = {mode};
    s.reference_tier = 3;
    s.reference_intensity = s.tiers[2].intensity;
    s.sweep = log_grid(-0.5, 1.5, 3);
    return s;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"fig1", "fig3", "fig5a", "fig5b", "fig6a", "fig6b", "fig7a", "fig7b", "wifi-only-baseline"};
}

Scenario preset(const std::string& name) {
    Scenario s;
    if (name == "fig1") {
        s = table2_scenario(name, AssocMode::noncrossing);
        s.reference_tier = 1;
        s.reference_intensity = s.tiers[0].intensity;
        s.sweep = log_grid(0.5, 2.5, 3);
        s.trials = 200;
        s.metrics = {"nu_*"};
    } else if (name == "fig3") {
        s = table2_scenario(name, AssocMode::noncrossing);
        s.reference_tier = 2;
        s.reference_intensity = s.tiers[1].intensity;
        s.trials = 200;
        s.metrics = {"rho_*", "nu_*"};
    } else if (name == "fig5a" || name == "fig5b") {
        s = table2_scenario(name, name == "fig5a" ? AssocMode::noncrossing : AssocMode::crossing);
        s.trials = 500;
        s.min_band_samples = 2000;
        s.metrics = {"P_*"};
    } else if (name == "fig6a" || name == "fig6b") {
        s = table2_scenario(name, name == "fig6a" ? AssocMode::noncrossing : AssocMode::crossing);
        s.trials = 1000;
        s.metrics = {"C_L", "C_U", "C_LU"};
    } else if (name == "fig7a" || name == "fig7b") {
        s = table2_scenario(name, name == "fig7a" ? AssocMode::noncrossing : AssocMode::crossing);
        s.trials = 1000;
        s.metrics = {"C_cov", "P_cov"};
    } else if (name == "wifi-only-baseline") {
        // The WiFi tier of Table II alone, on the Table II sweep axis.
        s = table2_scenario(name, AssocMode::noncrossing);
        TierSpec wifi = s.tiers[3];
        wifi.index = 1;
        s.tiers = {wifi};
        s.reference_tier = 0;
        s.reference_intensity = 5.0e-5;
        s.trials = 1000;
        s.metrics = {"P_U", "C_U", "C_LU", "C_cov"};
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    return s;
}

void validate_scenario(const Scenario& s) {
    validate_tiers(s.tiers);
    validate_channel(s.channel);
    validate_policy(s.policy, num_tiers(s.tiers));
    validate_quadrature(s.quadrature);
    if (s.modes.empty()) throw ConfigError("modes: at least one association mode required");
    if (s.sweep.empty()) throw ConfigError("sweep: grid must be non-empty");
    for (std::size_t i = 0; i < s.sweep.size(); ++i) {
        if (!(s.sweep[i] >= 0.0) || !std::isfinite(s.sweep[i])) throw ConfigError("sweep: values must be finite and >= 0");
        if (i > 0 && !(s.sweep[i] > s.sweep[i - 1])) throw ConfigError("sweep: grid must be strictly increasing");
    }
    if (!(s.reference_intensity > 0.0)) throw ConfigError("reference intensity must be > 0");
    if (s.trials < 1) throw ConfigError("trials must be >= 1");
    if (s.max_trials < s.trials) throw ConfigError("max_trials must be >= trials");
    if (s.window_radius < 0.0) throw ConfigError("window_radius must be > 0 or auto");
    if (!(s.window_eps > 0.0)) throw ConfigError("window_eps must be > 0");
    if (!(s.guard_quantile > 0.0 && s.guard_quantile < 1.0)) throw ConfigError("guard_quantile must lie in (0, 1)");
    if (s.contention_rounds < 1) throw ConfigError("contention_rounds must be >= 1");
    if (!(s.gamma_max > 0.0)) throw ConfigError("gamma_max must be > 0");
    if (s.area_trials < 1) throw ConfigError("area_trials must be >= 1");
}

// ---------------------------------------------------------------- JSON

namespace {

struct Reader {
    const json& j;
    std::string path;

    bool has(const char* key) const { return j.contains(key); }

    const json& at(const char* key) const {
        if (!j.contains(key)) throw ConfigError("field '" + sub(key) + "': missing");
        return j.at(key);
    }
    std::string sub(const char* key) const { return path.empty() ? key : path + "." + key; }

    double num(const char* key, double def) const { return has(key) ? num(key) : def; }
    double num(const char* key) const {
        const json& v = at(key);
        if (v.is_string() && (v == "inf" || v == "never")) return kInf;
        if (!v.is_number()) throw ConfigError("field '" + sub(key) + "': expected a number");
        return v.get<double>();
    }
    long long integer(const char* key, long long def) const {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_number_integer()) throw ConfigError("field '" + sub(key) + "': expected an integer");
        return v.get<long long>();
    }
    std::string str(const char* key, const std::string& def) const {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError("field '" + sub(key) + "': expected a string");
        return v.get<std::string>();
    }
};

TierSpec parse_tier(const json& j, int k, int K) {
    Reader r{j, "tiers[" + std::to_string(k - 1) + "]"};
    if (!j.is_object()) throw ConfigError("field '" + r.path + "': expected an object");
    TierSpec t;
    t.index = k;
    t.intensity = r.num("intensity");
    t.power = r.num("power");
    t.max_backoff = r.num("max_backoff", kNeverContends);
    t.sensing_radius = r.num("sensing_radius", 0.0);
    std::string rat = r.str("rat", k == K ? "U" : "L");
    if (rat == "L")
        t.rat = Rat::l_primary;
    else if (rat == "U")
        t.rat = Rat::u_only;
    else
        throw ConfigError("field '" + r.sub("rat") + "': expected \"L\" or \"U\"");
    return t;
}

json number_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Map the byte offset to a line for the message.
        std::size_t line = 1 + std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n');
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");

    Scenario s;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw ConfigError("field 'preset': expected a string");
        s = preset(j["preset"].get<std::string>());
    }
    Reader r{j, ""};
    try {
        s.name = r.str("name", s.name.empty() ? origin : s.name);
        s.channel.alpha = r.num("alpha", s.channel.alpha);
        s.channel.shadowing_sigma_db = r.num("shadowing_sigma_db", s.channel.shadowing_sigma_db);
        s.channel.gate_threshold = r.num("gate_threshold", s.channel.gate_threshold);
        s.channel.sir_threshold = r.num("sir_threshold", s.channel.sir_threshold);

        if (j.contains("tiers")) {
            const json& tj = j["tiers"];
            if (!tj.is_array()) throw ConfigError("field 'tiers': expected an array");
            s.tiers.clear();
            const int K = static_cast<int>(tj.size());
            for (int k = 1; k <= K; ++k) s.tiers.push_back(parse_tier(tj[k - 1], k, K));
        }

        std::string scheme = r.str("scheme", s.policy.scheme == Scheme::bna ? "bna" : "mmpa");
        if (scheme == "mmpa")
            s.policy.scheme = Scheme::mmpa;
        else if (scheme == "bna")
            s.policy.scheme = Scheme::bna;
        else
            throw ConfigError("field 'scheme': expected \"mmpa\" or \"bna\"");
        if (j.contains("bias")) {
            if (!j["bias"].is_array()) throw ConfigError("field 'bias': expected an array");
            s.policy.bias = j["bias"].get<std::vector<double>>();
        }
        if (j.contains("modes")) {
            if (!j["modes"].is_array()) throw ConfigError("field 'modes': expected an array");
            s.modes.clear();
            for (const auto& m : j["modes"]) {
                if (!m.is_string()) throw ConfigError("field 'modes': expected strings");
                s.modes.push_back(parse_mode(m.get<std::string>()));
            }
        }

        if (j.contains("sweep")) {
            const json& sj = j["sweep"];
            if (sj.is_array()) {
                s.sweep = sj.get<std::vector<double>>();
            } else if (sj.is_object()) {
                Reader sr{sj, "sweep"};
                s.sweep = log_grid(sr.num("log10_from"), sr.num("log10_to"),
                                   static_cast<int>(sr.integer("points", 3)));
            } else {
                throw ConfigError("field 'sweep': expected an array or {log10_from, log10_to, points}");
            }
        }
        if (j.contains("reference_tier")) {
            s.reference_tier = static_cast<int>(r.integer("reference_tier", 0));
            if (s.reference_tier < 1 || s.reference_tier > num_tiers(s.tiers))
                throw ConfigError("field 'reference_tier': out of range");
            s.reference_intensity = s.tiers[s.reference_tier - 1].intensity;
        } else if (j.contains("tiers") && s.reference_tier >= 1 && s.reference_tier <= num_tiers(s.tiers)) {
            s.reference_intensity = s.tiers[s.reference_tier - 1].intensity;
        }
        if (j.contains("reference_intensity")) {
            s.reference_intensity = r.num("reference_intensity");
            s.reference_tier = 0;
        }

        s.trials = static_cast<int>(r.integer("trials", s.trials));
        s.min_band_samples = static_cast<std::uint64_t>(r.integer("min_band_samples", static_cast<long long>(s.min_band_samples)));
        s.max_trials = static_cast<int>(r.integer("max_trials", s.max_trials));
        if (j.contains("window_radius")) {
            const json& w = j["window_radius"];
            if (w.is_string() && w == "auto")
                s.window_radius = 0.0;
            else
                s.window_radius = r.num("window_radius");
        }
        s.window_eps = r.num("window_eps", s.window_eps);
        std::string boundary = r.str("boundary", s.boundary == BoundaryMode::torus ? "torus" : "truncation");
        if (boundary == "truncation")
            s.boundary = BoundaryMode::truncation;
        else if (boundary == "torus")
            s.boundary = BoundaryMode::torus;
        else
            throw ConfigError("field 'boundary': expected \"truncation\" or \"torus\"");
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
                throw ConfigError("field 'seed': expected a non-negative integer");
            s.seed = j["seed"].get<std::uint64_t>();
        }
        s.guard_quantile = r.num("guard_quantile", s.guard_quantile);
        s.contention_rounds = static_cast<int>(r.integer("contention_rounds", s.contention_rounds));
        s.gamma_max = r.num("gamma_max", s.gamma_max);
        if (j.contains("metrics")) {
            if (!j["metrics"].is_array()) throw ConfigError("field 'metrics': expected an array");
            s.metrics = j["metrics"].get<std::vector<std::string>>();
        }
        if (j.contains("full_sensing_areas")) {
            if (!j["full_sensing_areas"].is_boolean()) throw ConfigError("field 'full_sensing_areas': expected a boolean");
            s.full_sensing_areas = j["full_sensing_areas"].get<bool>();
        }
        s.area_trials = static_cast<int>(r.integer("area_trials", s.area_trials));
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (s.max_trials < s.trials) s.max_trials = std::max(s.trials, 100000);
    validate_scenario(s);
    return s;
}

std::string dump_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["alpha"] = s.channel.alpha;
    j["shadowing_sigma_db"] = s.channel.shadowing_sigma_db;
    j["gate_threshold"] = s.channel.gate_threshold;
    j["sir_threshold"] = s.channel.sir_threshold;
    j["scheme"] = s.policy.scheme == Scheme::bna ? "bna" : "mmpa";
    if (!s.policy.bias.empty()) j["bias"] = s.policy.bias;
    j["modes"] = json::array();
    for (AssocMode m : s.modes) j["modes"].push_back(mode_name(m));
    j["tiers"] = json::array();
    for (const TierSpec& t : s.tiers) {
        json tj;
        tj["intensity"] = t.intensity;
        tj["power"] = t.power;
        tj["max_backoff"] = number_or_inf(t.max_backoff);
        tj["sensing_radius"] = t.sensing_radius;
        tj["rat"] = t.rat == Rat::u_only ? "U" : "L";
        j["tiers"].push_back(tj);
    }
    j["sweep"] = s.sweep;
    if (s.reference_tier > 0)
        j["reference_tier"] = s.reference_tier;
    else
        j["reference_intensity"] = s.reference_intensity;
    j["trials"] = s.trials;
    j["min_band_samples"] = s.min_band_samples;
    j["max_trials"] = s.max_trials;
    if (s.window_radius > 0.0)
        j["window_radius"] = s.window_radius;
    else
        j["window_radius"] = "auto";
    j["window_eps"] = s.window_eps;
    j["boundary"] = s.boundary == BoundaryMode::torus ? "torus" : "truncation";
    j["seed"] = s.seed;
    j["guard_quantile"] = s.guard_quantile;
    j["contention_rounds"] = s.contention_rounds;
    j["gamma_max"] = s.gamma_max;
    j["metrics"] = s.metrics;
    j["full_sensing_areas"] = s.full_sensing_areas;
    j["area_trials"] = s.area_trials;
    return j.dump(2);
}

Scenario load_scenario(const std::string& path_or_preset) {
    for (const auto& n : preset_names())
        if (n == path_or_preset) return preset(n);
    std::ifstream in(path_or_preset);
    if (!in) throw IoError("cannot open scenario '" + path_or_preset + "' (not a preset or readable file)");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path_or_preset);
}

// ---------------------------------------------------------------- sweep

double window_radius_for(const Scenario& s) {
    if (s.window_radius > 0.0) return s.window_radius;
    return auto_window_radius(s.tiers, s.channel.alpha, s.window_eps);
}

SimModel sim_model(const Scenario& s) {
    SimModel m;
    m.tiers = s.tiers;
    m.channel = s.channel;
    m.policy = s.policy;
    m.window.radius = window_radius_for(s);
    m.window.mode = s.boundary;
    m.guard_quantile = s.guard_quantile;
    m.contention_rounds = s.contention_rounds;
    return m;
}

std::pair<double, double> user_intensities(const Scenario& s, double x) {
    const double mu = x * s.reference_intensity;
    return {num_tiers(s.tiers) > 1 ? mu : 0.0, mu};
}

namespace {

bool contends(const Scenario& s, int k) { return s.tiers[k - 1].contends(); }

std::string prefix(AssocMode m) { return m == AssocMode::crossing ? "hat_" : ""; }

} // namespace

std::vector<std::string> metric_names(const Scenario& s, AssocMode mode) {
    const int K = num_tiers(s.tiers);
    std::vector<std::string> base;
    for (int k = 1; k <= K; ++k) base.push_back("nu_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) {
        if (!contends(s, k)) continue;
        base.push_back("rho_" + std::to_string(k));
        base.push_back("rho_blind_" + std::to_string(k));
        base.push_back("rho_count_" + std::to_string(k));
    }
    if (K > 1) {
        base.push_back("P_Ll");
        base.push_back("P_Lu");
        base.push_back("C_L");
        base.push_back("lu_acceptance");
    }
    for (const char* n : {"P_U", "P_cov", "C_U", "C_LU", "C_cov"}) base.push_back(n);
    std::vector<std::string> out;
    for (const auto& b : base) out.push_back(prefix(mode) + b);
    return out;
}

bool metric_selected(const Scenario& s, const std::string& name) {
    if (s.metrics.empty()) return true;
    std::string base = name.rfind("hat_", 0) == 0 ? name.substr(4) : name;
    for (const auto& m : s.metrics) {
        if (m == "all" || m == name || m == base) return true;
        if (!m.empty() && m.back() == '*') {
            std::string p = m.substr(0, m.size() - 1);
            if (name.rfind(p, 0) == 0 || base.rfind(p, 0) == 0) return true;
        }
    }
    return false;
}

int default_workers() {
    if (const char* e = std::getenv("HETNET_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(e, &end, 10);
        if (end == e || *end != '\0' || v < 1) throw ConfigError("HETNET_WORKERS must be a positive integer");
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    const int w = static_cast<int>(std::min<std::size_t>(std::max(1, workers), n));
    if (w <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < w; ++t) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
}

constexpr std::size_t kBatch = 32;

std::uint64_t band_count(const ModeTally& t, Band b) {
    return static_cast<std::uint64_t>(
        std::count_if(t.samples.begin(), t.samples.end(), [&](const SirSample& s) { return s.band == b; }));
}

bool bands_satisfied(const Scenario& s, const ModeTally& t) {
    if (s.min_band_samples == 0) return true;
    std::vector<Band> bands{Band::u_unlicensed};
    if (num_tiers(s.tiers) > 1) bands = {Band::l_licensed, Band::l_unlicensed, Band::u_unlicensed};
    for (Band b : bands)
        if (band_count(t, b) < s.min_band_samples) return false;
    return true;
}

std::vector<ModeTally> simulate_point(const Scenario& s, std::size_t point, double x, int workers,
                                      std::ostream* log) {
    const SimModel model = sim_model(s);
    const int K = num_tiers(s.tiers);
    auto [mu_L, mu_U] = user_intensities(s, x);
    std::vector<ModeTally> acc;
    for (AssocMode m : s.modes) acc.emplace_back(m, K);
    std::vector<bool> active(s.modes.size(), true);

    std::size_t done = 0;
    while (true) {
        const std::size_t cap = done < static_cast<std::size_t>(s.trials) ? static_cast<std::size_t>(s.trials)
                                                                          : static_cast<std::size_t>(s.max_trials);
        const std::size_t n = std::min<std::size_t>(kBatch, cap - done);
        if (n == 0) break;
        std::vector<std::vector<ModeTally>> slot(n);
        parallel_for(n, workers, [&](std::size_t i) {
            std::vector<ModeTally> local;
            ModeTally* nc = nullptr;
            ModeTally* cr = nullptr;
            for (std::size_t m = 0; m < s.modes.size(); ++m) local.emplace_back(s.modes[m], K);
            for (std::size_t m = 0; m < s.modes.size(); ++m) {
                if (!active[m]) continue;
                (s.modes[m] == AssocMode::crossing ? cr : nc) = &local[m];
            }
            std::uint64_t seed = derive_seed(s.seed, {point, done + i});
            run_trial(model, mu_L, mu_U, seed, nc, cr);
            slot[i] = std::move(local);
        });
        for (auto& l : slot)
            for (std::size_t m = 0; m < acc.size(); ++m)
                if (active[m]) acc[m].merge(l[m]);
        done += n;
        if (done < static_cast<std::size_t>(s.trials)) continue;
        bool any = false;
        for (std::size_t m = 0; m < acc.size(); ++m) {
            if (active[m] && bands_satisfied(s, acc[m])) active[m] = false;
            any = any || active[m];
        }
        if (!any) break;
    }
    if (log) {
        for (const ModeTally& t : acc)
            *log << "[sweep] " << s.name << " x=" << x << " " << mode_name(t.mode) << ": " << t.trials
                 << " trials, L-unlicensed conditioning rate " << t.conditioning_rate() << "\n";
    }
    return acc;
}

struct Cell {
    std::optional<double> mc, se, bound, limit;
    std::uint64_t n = 0;
};

Estimate sum_estimates(const Estimate& a, const Estimate& b) {
    Estimate e;
    e.value = a.value + b.value;
    e.se = std::sqrt(a.se * a.se + b.se * b.se);
    e.count = std::min(a.count, b.count);
    return e;
}

void put_mc(Cell& c, const Estimate& e) {
    c.mc = e.value;
    c.se = e.se;
    c.n = e.count;
}

std::map<std::string, Cell> point_cells(const Scenario& s, AssocMode mode, const ModeTally* t, const BoundSet& b) {
    const int K = num_tiers(s.tiers);
    const std::string pre = prefix(mode);
    std::map<std::string, Cell> out;
    auto cell = [&](const std::string& n) -> Cell& { return out[pre + n]; };

    for (int k = 1; k <= K; ++k) {
        Cell& c = cell("nu_" + std::to_string(k));
        c.bound = b.nu[k - 1];
        if (t) put_mc(c, t->voids.estimate(k));
    }
    for (int k = 1; k <= K; ++k) {
        if (!contends(s, k)) continue;
        const std::string ks = std::to_string(k);
        Cell& r = cell("rho_" + ks);
        Cell& rb = cell("rho_blind_" + ks);
        Cell& rc = cell("rho_count_" + ks);
        r.bound = b.rho[k - 1];
        rc.bound = b.rho[k - 1];
        rb.bound = b.rho_blind[k - 1];
        if (t) {
            // A tier that never contended leaves its estimate as nan.
            auto guarded = [](Cell& c, auto&& f) {
                try {
                    put_mc(c, f());
                } catch (const RunError&) {
                    c.mc = NAN;
                }
            };
            guarded(r, [&] { return t->access_cond.access(k); });
            guarded(rb, [&] { return t->access_cond_blind.access(k); });
            guarded(rc, [&] { return t->access.access(k); });
        }
    }

    Cell& pu = cell("P_U");
    pu.bound = b.coverage.P_U;
    pu.limit = b.coverage_limit.P_U;
    Cell& pcov = cell("P_cov");
    pcov.bound = b.coverage.P_cov;
    pcov.limit = b.coverage_limit.P_cov;
    Cell& cu = cell("C_U");
    cu.bound = b.capacity.C_U;
    cu.limit = b.capacity_limit.C_U;
    Cell& clu = cell("C_LU");
    clu.bound = b.capacity.C_LU;
    clu.limit = b.capacity_limit.C_LU;
    Cell& ccov = cell("C_cov");
    ccov.bound = b.capacity.C_cov;
    ccov.limit = b.capacity_limit.C_cov;
    if (K > 1) {
        Cell& pll = cell("P_Ll");
        pll.bound = b.coverage.P_Ll;
        pll.limit = b.coverage_limit.P_Ll;
        Cell& plu = cell("P_Lu");
        plu.bound = b.coverage.P_Lu;
        plu.limit = b.coverage_limit.P_Lu;
        Cell& cl = cell("C_L");
        cl.bound = b.capacity.C_L;
        cl.limit = b.capacity_limit.C_L;
        cell("lu_acceptance");
    }
    if (!t) return out;

    const double theta = s.channel.sir_threshold;
    CoverageEstimate cov = estimate_coverage(t->samples, theta, K);
    const Estimate P_U = cov.at(Band::u_unlicensed);
    put_mc(pu, P_U);
    Estimate P_Ll = cov.at(Band::l_licensed);
    if (K > 1) {
        put_mc(out[pre + "P_Ll"], P_Ll);
        put_mc(out[pre + "P_Lu"], cov.at(Band::l_unlicensed));
        Cell& acc = out[pre + "lu_acceptance"];
        acc.mc = t->conditioning_rate();
        acc.se = proportion(t->lu_accepts, t->lu_attempts).se;
        acc.n = t->lu_attempts;
    }
    std::vector<Estimate> per_tier(K, P_Ll);
    per_tier[K - 1] = P_U;
    put_mc(pcov, estimate_coexisting_coverage(per_tier, b.share_hat));

    // Access fractions from the simulated contention, shares from the model.
    double f_L = 0.0;
    for (int k = 1; k < K; ++k)
        if (contends(s, k)) f_L += t->access.transmit_fraction(k).value * b.share[k - 1];
    const double f_U = contends(s, K) ? t->access.transmit_fraction(K).value : 0.0;
    SpectrumEfficiency se = estimate_spectrum_efficiency(t->samples, f_L, f_U, s.gamma_max);
    put_mc(cu, se.C_U);
    if (K > 1) {
        put_mc(out[pre + "C_L"], se.C_L);
        put_mc(clu, sum_estimates(se.C_L, se.C_U));
    } else {
        put_mc(clu, se.C_U);
    }

    CapacityTerms ct;
    for (int k = 1; k <= K; ++k) {
        ct.lambda.push_back(s.tiers[k - 1].intensity);
        ct.non_void.push_back(1.0 - t->voids.estimate(k).value);
    }
    ct.P_L = P_Ll;
    ct.C_L = se.C_L;
    ct.P_U = P_U;
    ct.C_U = se.C_U;
    put_mc(ccov, estimate_network_capacity(ct));
    return out;
}

} // namespace

MeanAreaTable simulate_mean_areas(const Scenario& s, AssocMode mode, double x, int trials) {
    const SimModel model = sim_model(s);
    const int K = num_tiers(s.tiers);
    auto [mu_L, mu_U] = user_intensities(s, x);
    AssociationPolicy p = s.policy;
    p.mode = mode;
    AreaTally tally(K);
    for (int i = 0; i < trials; ++i) {
        Deployment d = sample_deployment(s.tiers, {mu_L, mu_U}, model.window, s.channel.sigma_ln(),
                                         derive_seed(s.seed, {kTagAux, static_cast<std::uint64_t>(i)}));
        if (mode == AssocMode::crossing) {
            d.users[0].insert(d.users[0].end(), d.users[1].begin(), d.users[1].end());
            d.users.resize(1);
        }
        AssociationMap m = associate(d, s.tiers, p, s.channel.alpha, AssociateOptions{true});
        tally.add(d, m, s.tiers, p, s.channel.alpha);
    }
    return tally.table(s.tiers);
}

std::vector<ResultRow> run_sweep(const Scenario& s, const SweepOptions& opt) {
    validate_scenario(s);
    const int workers = opt.workers > 0 ? opt.workers : default_workers();
    std::vector<ResultRow> rows;
    for (std::size_t pi = 0; pi < s.sweep.size(); ++pi) {
        const double x = s.sweep[pi];
        const auto t0 = std::chrono::steady_clock::now();
        std::map<std::string, Cell> cells;
        try {
            auto [mu_L, mu_U] = user_intensities(s, x);
            std::vector<ModeTally> tallies;
            if (opt.simulate) tallies = simulate_point(s, pi, x, workers, opt.log);
            for (std::size_t m = 0; m < s.modes.size(); ++m) {
                AssociationPolicy p = s.policy;
                p.mode = s.modes[m];
                MeanAreaTable areas = s.full_sensing_areas ? full_sensing_areas(s.tiers)
                                      : opt.simulate      ? tallies[m].areas.table(s.tiers)
                                                          : simulate_mean_areas(s, s.modes[m], x, s.area_trials);
                BoundSet b = evaluate_bounds(s.tiers, s.channel, p, mu_L, mu_U, areas, s.quadrature);
                auto c = point_cells(s, s.modes[m], opt.simulate ? &tallies[m] : nullptr, b);
                cells.insert(c.begin(), c.end());
            }
        } catch (const std::exception& e) {
            cells.clear();
            for (AssocMode m : s.modes)
                for (const auto& n : metric_names(s, m)) {
                    Cell c;
                    c.mc = NAN;
                    c.se = NAN;
                    cells[n] = c;
                }
            if (opt.log) *opt.log << "[sweep] " << s.name << " x=" << x << " failed: " << e.what() << "\n";
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (auto& [name, c] : cells) {
            if (!metric_selected(s, name)) continue;
            ResultRow r;
            r.sweep_value = x;
            r.metric = name;
            r.mc_estimate = c.mc;
            r.mc_stderr = c.se;
            r.analytic_bound = c.bound;
            r.analytic_limit = c.limit;
            r.sample_count = c.n;
            if (opt.record_time) r.wall_time_s = wall;
            rows.push_back(std::move(r));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
        return a.metric < b.metric;
    });
    return rows;
}

// ---------------------------------------------------------------- CSV

namespace {

const char* kHeader = "sweep_value,metric,mc_estimate,mc_stderr,analytic_bound,analytic_limit,sample_count,wall_time_s";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::optional<double> parse_field(const std::string& f, std::size_t line) {
    if (f.empty()) return std::nullopt;
    if (f == "nan" || f == "-nan") return NAN;
    char* end = nullptr;
    double v = std::strtod(f.c_str(), &end);
    if (end == f.c_str() || *end != '\0') throw ConfigError("csv line " + std::to_string(line) + ": bad number '" + f + "'");
    return v;
}

} // namespace

std::string format_csv(const std::vector<ResultRow>& rows) {
    std::string out = kHeader;
    out += "\n";
    for (const ResultRow& r : rows) {
        out += fmt(r.sweep_value) + "," + r.metric + "," + fmt(r.mc_estimate) + "," + fmt(r.mc_stderr) + "," +
               fmt(r.analytic_bound) + "," + fmt(r.analytic_limit) + "," + std::to_string(r.sample_count) + "," +
               fmt(r.wall_time_s) + "\n";
    }
    return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw ConfigError("csv: missing or unexpected header");
    std::vector<ResultRow> rows;
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t a = 0;
        for (;;) {
            std::size_t b = line.find(',', a);
            f.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
            if (b == std::string::npos) break;
            a = b + 1;
        }
        if (f.size() != 8) throw ConfigError("csv line " + std::to_string(ln) + ": expected 8 fields");
        ResultRow r;
        auto x = parse_field(f[0], ln);
        if (!x) throw ConfigError("csv line " + std::to_string(ln) + ": empty sweep_value");
        r.sweep_value = *x;
        r.metric = f[1];
        r.mc_estimate = parse_field(f[2], ln);
        r.mc_stderr = parse_field(f[3], ln);
        r.analytic_bound = parse_field(f[4], ln);
        r.analytic_limit = parse_field(f[5], ln);
        r.sample_count = std::stoull(f[6]);
        r.wall_time_s = parse_field(f[7], ln);
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << format_csv(rows);
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace hetnet
