#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace hetnet {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sentinel backoff for tiers that stay off the unlicensed band.
inline constexpr double kNeverContends = kInf;

enum class Rat { l_primary, u_only };

struct TierSpec {
    int index = 1;               // 1-based
    double intensity = 0.0;      // APs per m^2
    double power = 1.0;          // W
    double max_backoff = kNeverContends;
    double sensing_radius = 0.0; // m
    Rat rat = Rat::l_primary;

    bool contends() const { return std::isfinite(max_backoff); }
};

struct ChannelParams {
    double alpha = 4.0;
    double shadowing_sigma_db = 0.0;
    double gate_threshold = 4.481; // Delta, linear power ratio
    double sir_threshold = 0.5;    // theta, linear

    // Standard deviation of ln G.
    double sigma_ln() const { return shadowing_sigma_db * std::log(10.0) / 10.0; }
};

enum class BoundaryMode { truncation, torus };

struct Window {
    double radius = 1000.0;
    BoundaryMode mode = BoundaryMode::truncation;
};

// Throws ConfigError on any violated invariant.
void validate_tiers(const std::vector<TierSpec>& tiers);
void validate_channel(const ChannelParams& ch);

inline int num_tiers(const std::vector<TierSpec>& tiers) { return static_cast<int>(tiers.size()); }

} // namespace hetnet
