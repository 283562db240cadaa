#pragma once

#include <cstdint>
#include <vector>

#include "hetnet/config.hpp"

namespace hetnet {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

enum class Access : std::uint8_t { unset, granted, denied, not_contending };

struct MarkedPoint {
    double x = 0.0, y = 0.0;
    int tier = 1;            // 1-based
    double h = 1.0;          // licensed-band fading toward the typical user
    double h_u = 1.0;        // unlicensed-band fading toward the typical user
    double shadow_inv = 1.0; // G^{-1}, also drives the association weight
    double shadow_u_inv = 1.0;
    double gate_gain = 1.0;  // own-link unlicensed gain read by the CSMA gate
    std::int8_t v = -1;      // -1 unset, 0 void, 1 serving
    double backoff = -1.0;   // < 0: none drawn
    Access access = Access::unset;
};

struct Deployment {
    Window window;
    std::vector<MarkedPoint> aps;            // grouped by tier, ascending
    std::vector<std::size_t> tier_begin;     // size K+1
    std::vector<std::vector<Vec2>> users;    // one vector per population

    int num_tiers() const { return static_cast<int>(tier_begin.size()) - 1; }
    std::size_t tier_count(int k) const { return tier_begin[k] - tier_begin[k - 1]; }
};

struct SamplingLimits {
    double max_expected_points = 2.0e7;
};

Deployment sample_deployment(const std::vector<TierSpec>& tiers, const std::vector<double>& user_intensities,
                             const Window& window, double sigma_ln, std::uint64_t seed,
                             const SamplingLimits& limits = {});

// Euclidean in truncation mode; minimal image on [-R, R]^2 in torus mode.
double distance(Vec2 a, Vec2 b, const Window& window);

// Expected interference from APs beyond R (unit-mean marks): sum lambda_k P_k 2 pi R^{2-a}/(a-2).
double interference_tail(const std::vector<TierSpec>& tiers, double alpha, double r);
// Expected interference from the annulus 1 <= |x| <= R.
double interference_annulus(const std::vector<TierSpec>& tiers, double alpha, double r);

// Smallest R with tail(R) <= eps * annulus(R). With a common alpha the tier
// sum cancels: R = ((1 + eps)/eps)^{1/(alpha-2)}.
double choose_window_radius(const std::vector<TierSpec>& tiers, double alpha, double eps);

// max(choose_window_radius, sqrt(n_floor / (pi lambda_min)), sqrt(n_total / (pi sum lambda))).
double auto_window_radius(const std::vector<TierSpec>& tiers, double alpha, double eps, double n_floor = 10.0,
                          double n_total = 1000.0);

bool inside_window(Vec2 p, const Window& window);
// Distance from p to the window boundary (>= 0 inside).
double boundary_clearance(Vec2 p, const Window& window);

} // namespace hetnet
