#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetnet/analytic.hpp"
#include "hetnet/association.hpp"
#include "hetnet/config.hpp"
#include "hetnet/sir.hpp"

namespace hetnet {

struct Scenario {
    std::string name;
    ChannelParams channel;
    std::vector<TierSpec> tiers;
    AssociationPolicy policy;
    std::vector<AssocMode> modes{AssocMode::noncrossing};

    // Sweep variable x = mu_L / lambda_ref. Noncrossing runs mu_L = mu_U = x
    // lambda_ref (mu_L = 0 without L tiers); crossing pools both, mu = 2 x lambda_ref.
    std::vector<double> sweep;
    double reference_intensity = 0.0;
    int reference_tier = 0; // 0 when the reference was given as an intensity

    int trials = 200;
    std::uint64_t min_band_samples = 0; // keep adding trials until every band has this many
    int max_trials = 100000;
    double window_radius = 0.0; // 0: auto
    double window_eps = 1e-4;
    BoundaryMode boundary = BoundaryMode::truncation;
    std::uint64_t seed = 1;
    double guard_quantile = 0.999;
    int contention_rounds = 1;
    double gamma_max = 1.0e6;
    std::vector<std::string> metrics; // empty: all; a trailing '*' matches a prefix
    bool full_sensing_areas = false;  // analytic areas without the mean-area simulation
    int area_trials = 40;             // deployments for analytic-only mean areas
    QuadratureSettings quadrature;
};

// Throws ConfigError with the offending field.
void validate_scenario(const Scenario& s);

std::vector<std::string> preset_names();
Scenario preset(const std::string& name);
// Preset name, or a JSON scenario file.
Scenario load_scenario(const std::string& path_or_preset);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>");
std::string dump_scenario(const Scenario& s);

double window_radius_for(const Scenario& s);
SimModel sim_model(const Scenario& s);
// (mu_L, mu_U) at sweep value x.
std::pair<double, double> user_intensities(const Scenario& s, double x);

struct ResultRow {
    double sweep_value = 0.0;
    std::string metric;
    std::optional<double> mc_estimate, mc_stderr, analytic_bound, analytic_limit;
    std::uint64_t sample_count = 0;
    std::optional<double> wall_time_s;
};

// Every metric a mode can report, before filtering.
std::vector<std::string> metric_names(const Scenario& s, AssocMode mode);
bool metric_selected(const Scenario& s, const std::string& name);

struct SweepOptions {
    int workers = 0;           // 0: HETNET_WORKERS or hardware concurrency
    bool simulate = true;      // false: analytic columns only
    bool record_time = true;   // false leaves wall_time_s empty (byte-stable output)
    std::ostream* log = nullptr;
};

int default_workers();

// Rows sorted by sweep value then metric name. A sweep point that throws
// yields "nan" estimates with sample_count 0 and the sweep goes on.
std::vector<ResultRow> run_sweep(const Scenario& s, const SweepOptions& opt = {});

// Mean contention areas from association-only deployments.
MeanAreaTable simulate_mean_areas(const Scenario& s, AssocMode mode, double x, int trials);

std::string format_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
// Throws IoError naming the path.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

const char* mode_name(AssocMode m);
AssocMode parse_mode(const std::string& s);

} // namespace hetnet
