#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/experiments.hpp"
#include "hetnet/simd.hpp"

using namespace hetnet;

namespace {

struct Common {
    std::string preset, config;
    int trials = 0;
    long long seed = -1;
    std::string mode;
    std::vector<std::string> metrics;
    std::string out;
    int workers = 0;
    bool no_timing = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
    auto* g = cmd->add_option_group("scenario");
    g->add_option("--preset", c.preset, "Preset name (" + [] {
        std::string s;
        for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }() + ")");
    g->add_option("--config", c.config, "Scenario JSON file");
    g->require_option(1);
    cmd->add_option("--trials", c.trials, "Trials per sweep point (minimum when a sample target is set)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Root seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--mode", c.mode, "noncrossing, crossing or both")->check(CLI::IsMember({"noncrossing", "crossing", "both"}));
    cmd->add_option("--metrics", c.metrics, "Metric names or prefixes ending in '*' (comma separated)")->delimiter(',');
    cmd->add_option("--out", c.out, "CSV output path (stdout when omitted)");
    cmd->add_option("--workers", c.workers, "Worker threads (default: HETNET_WORKERS or all cores)")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-timing", c.no_timing, "Leave wall_time_s empty so reruns are byte-identical");
    cmd->add_flag("--quiet", c.quiet, "No progress log on stderr");
}

Scenario resolve(const Common& c) {
    Scenario s = c.preset.empty() ? load_scenario(c.config) : preset(c.preset);
    if (c.trials > 0) {
        s.trials = c.trials;
        s.max_trials = std::max(s.max_trials, s.trials);
    }
    if (c.seed >= 0) s.seed = static_cast<std::uint64_t>(c.seed);
    if (c.mode == "both")
        s.modes = {AssocMode::noncrossing, AssocMode::crossing};
    else if (!c.mode.empty())
        s.modes = {parse_mode(c.mode)};
    if (!c.metrics.empty()) s.metrics = c.metrics;
    validate_scenario(s);
    return s;
}

void write(const std::vector<ResultRow>& rows, const std::string& out) {
    if (out.empty())
        std::cout << format_csv(rows);
    else
        emit_csv(rows, out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-RAT HetNet coverage and capacity: Monte Carlo against analytic bounds"};
    app.require_subcommand(1);

    Common sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep with analytic columns");
    add_common(simulate, sim);
    long long min_samples = -1;
    simulate->add_option("--min-band-samples", min_samples, "Keep adding trials until every band has this many samples")
        ->check(CLI::NonNegativeNumber);

    Common an;
    auto* analytic = app.add_subcommand("analytic-only", "Bounds and limits without the SIR simulation");
    add_common(analytic, an);
    bool full_areas = false;
    int area_trials = 0;
    analytic->add_flag("--full-areas", full_areas, "Use full sensing areas instead of simulated mean areas");
    analytic->add_option("--area-trials", area_trials, "Deployments for the mean-area estimate")->check(CLI::PositiveNumber);

    Common ar;
    auto* areas = app.add_subcommand("areas", "Mean contention areas A_{k,m} at one sweep value");
    add_common(areas, ar);
    double x = -1.0;
    areas->add_option("--x", x, "Sweep value (default: first grid point)")->check(CLI::NonNegativeNumber);

    Common sc;
    auto* show = app.add_subcommand("scenario", "Print the resolved scenario as JSON");
    add_common(show, sc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorCategory::config);
    }

    try {
        if (*simulate) {
            Scenario s = resolve(sim);
            if (min_samples >= 0) s.min_band_samples = static_cast<std::uint64_t>(min_samples);
            SweepOptions opt;
            opt.workers = sim.workers;
            opt.record_time = !sim.no_timing;
            opt.log = sim.quiet ? nullptr : &std::cerr;
            if (!sim.quiet) std::cerr << "[simd] " << simd::active().name << "\n";
            write(run_sweep(s, opt), sim.out);
        } else if (*analytic) {
            Scenario s = resolve(an);
            if (full_areas) s.full_sensing_areas = true;
            if (area_trials > 0) s.area_trials = area_trials;
            SweepOptions opt;
            opt.simulate = false;
            opt.record_time = !an.no_timing;
            opt.log = an.quiet ? nullptr : &std::cerr;
            write(run_sweep(s, opt), an.out);
        } else if (*areas) {
            Scenario s = resolve(ar);
            const double xv = x >= 0.0 ? x : s.sweep.front();
            std::ostringstream os;
            os << "mode,k,m,mean_area_m2\n";
            for (AssocMode m : s.modes) {
                MeanAreaTable t = simulate_mean_areas(s, m, xv, ar.trials > 0 ? ar.trials : s.area_trials);
                for (int k = 1; k <= t.K; ++k)
                    for (int j = 1; j <= t.K; ++j) {
                        char buf[64];
                        std::snprintf(buf, sizeof buf, "%.9g", t.at(k, j));
                        os << mode_name(m) << "," << k << "," << j << "," << buf << "\n";
                    }
            }
            if (ar.out.empty()) {
                std::cout << os.str();
            } else {
                std::FILE* f = std::fopen(ar.out.c_str(), "wb");
                if (!f) throw IoError("cannot open '" + ar.out + "' for writing");
                std::string str = os.str();
                bool ok = std::fwrite(str.data(), 1, str.size(), f) == str.size();
                ok = std::fclose(f) == 0 && ok;
                if (!ok) throw IoError("write failed for '" + ar.out + "'");
            }
        } else if (*show) {
            std::cout << dump_scenario(resolve(sc)) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorCategory::runtime);
    }
    return 0;
}
