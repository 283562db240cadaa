#include "hetnet/ppp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {
namespace {

double window_area(const Window& w) {
    return w.mode == BoundaryMode::torus ? 4.0 * w.radius * w.radius : std::numbers::pi * w.radius * w.radius;
}

// Both coordinates from one 64-bit draw, 32 bits each, mapped to (-1, 1).
std::pair<double, double> unit_square(Engine& eng) {
    constexpr double scale = 2.0 / 4294967296.0;
    const std::uint64_t v = eng();
    return {(static_cast<double>(v >> 32) + 0.5) * scale - 1.0,
            (static_cast<double>(v & 0xffffffffULL) + 0.5) * scale - 1.0};
}

Vec2 uniform_point(Engine& eng, const Window& w) {
    if (w.mode == BoundaryMode::torus) {
        auto [a, b] = unit_square(eng);
        return {w.radius * a, w.radius * b};
    }
    // Rejection from the bounding square.
    for (;;) {
        auto [a, b] = unit_square(eng);
        if (a * a + b * b < 1.0) return {w.radius * a, w.radius * b};
    }
}

} // namespace

Deployment sample_deployment(const std::vector<TierSpec>& tiers, const std::vector<double>& user_intensities,
                             const Window& window, double sigma_ln, std::uint64_t seed,
                             const SamplingLimits& limits) {
    if (!(window.radius > 0.0)) throw ConfigError("window radius must be > 0");
    const double area = window_area(window);
    double expected = 0.0;
    for (const auto& t : tiers) expected += t.intensity * area;
    for (double mu : user_intensities) {
        if (!(mu >= 0.0)) throw ConfigError("user intensity must be >= 0");
        expected += mu * area;
    }
    if (expected > limits.max_expected_points)
        throw RunError("window too large: " + std::to_string(expected) + " expected points");

    Deployment d;
    d.window = window;
    d.tier_begin.push_back(0);
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& t : tiers) {
        Engine eng = make_stream(seed, {kTagDeployment, static_cast<std::uint64_t>(t.index)});
        std::size_t n = 0;
        if (t.intensity > 0.0) n = std::poisson_distribution<std::size_t>(t.intensity * area)(eng);
        for (std::size_t i = 0; i < n; ++i) {
            MarkedPoint p;
            Vec2 pos = uniform_point(eng, window);
            p.x = pos.x;
            p.y = pos.y;
            p.tier = t.index;
            p.h = expo(eng);
            p.h_u = expo(eng);
            p.shadow_inv = std::exp(sigma_ln * gauss(eng));
            p.shadow_u_inv = std::exp(sigma_ln * gauss(eng));
            p.gate_gain = expo(eng) * std::exp(sigma_ln * gauss(eng));
            d.aps.push_back(p);
        }
        d.tier_begin.push_back(d.aps.size());
    }
    for (std::size_t pop = 0; pop < user_intensities.size(); ++pop) {
        Engine eng = make_stream(seed, {kTagUsers, pop});
        std::vector<Vec2> us;
        if (user_intensities[pop] > 0.0) {
            std::size_t n = std::poisson_distribution<std::size_t>(user_intensities[pop] * area)(eng);
            us.reserve(n);
            for (std::size_t i = 0; i < n; ++i) us.push_back(uniform_point(eng, window));
        }
        d.users.push_back(std::move(us));
    }
    return d;
}

double distance(Vec2 a, Vec2 b, const Window& window) {
    double dx = a.x - b.x, dy = a.y - b.y;
    if (window.mode == BoundaryMode::torus) {
        double L = 2.0 * window.radius;
        dx -= L * std::round(dx / L);
        dy -= L * std::round(dy / L);
    }
    return std::hypot(dx, dy);
}

double interference_tail(const std::vector<TierSpec>& tiers, double alpha, double r) {
    double lp = 0.0;
    for (const auto& t : tiers) lp += t.intensity * t.power;
    return lp * 2.0 * std::numbers::pi * std::pow(r, 2.0 - alpha) / (alpha - 2.0);
}

double interference_annulus(const std::vector<TierSpec>& tiers, double alpha, double r) {
    double lp = 0.0;
    for (const auto& t : tiers) lp += t.intensity * t.power;
    return lp * 2.0 * std::numbers::pi * (1.0 - std::pow(r, 2.0 - alpha)) / (alpha - 2.0);
}

double choose_window_radius(const std::vector<TierSpec>& tiers, double alpha, double eps) {
    if (!(alpha > 2.0)) throw ConfigError("alpha > 2 required");
    if (!(eps > 0.0)) throw ConfigError("tail tolerance must be > 0");
    (void)tiers;
    double r = std::pow((1.0 + eps) / eps, 1.0 / (alpha - 2.0));
    if (!std::isfinite(r)) throw RunError("tail tolerance unachievable in double precision");
    return r;
}

double auto_window_radius(const std::vector<TierSpec>& tiers, double alpha, double eps, double n_floor,
                          double n_total) {
    double r = choose_window_radius(tiers, alpha, eps);
    double lmin = kInf, lsum = 0.0;
    for (const auto& t : tiers) {
        if (t.intensity > 0.0) lmin = std::min(lmin, t.intensity);
        lsum += t.intensity;
    }
    if (std::isfinite(lmin)) r = std::max(r, std::sqrt(n_floor / (std::numbers::pi * lmin)));
    // The interference share lost beyond R is about 1/(pi sum(lambda) R^2).
    if (lsum > 0.0) r = std::max(r, std::sqrt(n_total / (std::numbers::pi * lsum)));
    return r;
}

bool inside_window(Vec2 p, const Window& w) {
    if (w.mode == BoundaryMode::torus) return std::abs(p.x) <= w.radius && std::abs(p.y) <= w.radius;
    return p.x * p.x + p.y * p.y <= w.radius * w.radius;
}

double boundary_clearance(Vec2 p, const Window& w) {
    if (w.mode == BoundaryMode::torus) return kInf;
    return w.radius - std::hypot(p.x, p.y);
}

} // namespace hetnet
