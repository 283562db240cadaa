#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hetnet/experiments.hpp"
#include "hetnet/ppp.hpp"

using namespace hetnet;

namespace {

double corr(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= a.size();
    mb /= b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<TierSpec> one_tier(double lambda, double power = 1.0) {
    TierSpec t;
    t.index = 1;
    t.intensity = lambda;
    t.power = power;
    t.max_backoff = 1.0;
    t.sensing_radius = 30.0;
    t.rat = Rat::u_only;
    return {t};
}

} // namespace

TEST_CASE("empty process") {
    auto tiers = preset("fig1").tiers;
    for (auto& t : tiers) t.intensity = 0.0;
    Deployment d = sample_deployment(tiers, {0.0, 0.0}, Window{500.0}, 0.3, 7);
    CHECK(d.aps.empty());
    CHECK(d.num_tiers() == 4);
    CHECK(d.users.size() == 2);
}

TEST_CASE("Poisson counts and uniformity") {
    auto tiers = preset("fig1").tiers;
    const double R = 5000.0;
    const Window w{R};
    const int seeds = 1000;
    const double area = std::numbers::pi * R * R;
    const double oracle[4] = {78.54, 785.4, 3927.0, 7854.0};
    for (int k = 0; k < 4; ++k) CHECK(tiers[k].intensity * area == doctest::Approx(oracle[k]).epsilon(1e-3));

    std::vector<double> sum(4, 0.0), sum2(4, 0.0);
    double quad[4] = {0, 0, 0, 0};
    for (int s = 0; s < seeds; ++s) {
        Deployment d = sample_deployment(tiers, {0.0, 0.0}, w, 0.3988, 1000 + s);
        for (int k = 1; k <= 4; ++k) {
            double n = static_cast<double>(d.tier_count(k));
            sum[k - 1] += n;
            sum2[k - 1] += n * n;
        }
        if (s == 0)
            for (std::size_t i = d.tier_begin[3]; i < d.tier_begin[4]; ++i)
                quad[(d.aps[i].x >= 0 ? 1 : 0) + (d.aps[i].y >= 0 ? 2 : 0)] += 1;
    }
    for (int k = 0; k < 4; ++k) {
        double expected = oracle[k];
        double mean = sum[k] / seeds;
        double var = (sum2[k] - seeds * mean * mean) / (seeds - 1);
        CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(expected / seeds) + 1e-3 * expected);
        CHECK(std::abs(var / mean - 1.0) < 0.1 + 4.0 * std::sqrt(2.0 / seeds));
    }
    double n = quad[0] + quad[1] + quad[2] + quad[3], chi2 = 0;
    for (double q : quad) chi2 += (q - n / 4) * (q - n / 4) / (n / 4);
    CHECK(chi2 < 11.345); // chi-square, 3 dof, 1%
}

TEST_CASE("mark independence") {
    auto tiers = one_tier(1e-3);
    Deployment d = sample_deployment(tiers, {}, Window{2000.0}, 0.3988, 3);
    REQUIRE(d.aps.size() > 10000);
    std::vector<double> h, hu, g, gu;
    for (const auto& a : d.aps) {
        h.push_back(a.h);
        hu.push_back(a.h_u);
        g.push_back(a.shadow_inv);
        gu.push_back(a.shadow_u_inv);
    }
    CHECK(std::abs(corr(h, hu)) < 0.05);
    CHECK(std::abs(corr(g, gu)) < 0.05);
}

TEST_CASE("determinism") {
    auto tiers = preset("fig5a").tiers;
    Deployment a = sample_deployment(tiers, {1e-4, 1e-4}, Window{800.0}, 0.3988, 99);
    Deployment b = sample_deployment(tiers, {1e-4, 1e-4}, Window{800.0}, 0.3988, 99);
    REQUIRE(a.aps.size() == b.aps.size());
    bool same = true;
    for (std::size_t i = 0; i < a.aps.size(); ++i) {
        const auto &p = a.aps[i], &q = b.aps[i];
        same = same && p.x == q.x && p.y == q.y && p.h == q.h && p.h_u == q.h_u && p.shadow_inv == q.shadow_inv &&
               p.shadow_u_inv == q.shadow_u_inv && p.gate_gain == q.gate_gain && p.tier == q.tier;
    }
    CHECK(same);
    for (std::size_t u = 0; u < 2; ++u) {
        REQUIRE(a.users[u].size() == b.users[u].size());
        for (std::size_t i = 0; i < a.users[u].size(); ++i) {
            CHECK(a.users[u][i].x == b.users[u][i].x);
            CHECK(a.users[u][i].y == b.users[u][i].y);
        }
    }
    Deployment c = sample_deployment(tiers, {1e-4, 1e-4}, Window{800.0}, 0.3988, 100);
    CHECK((c.aps.size() != a.aps.size() || c.aps[0].x != a.aps[0].x));
}

TEST_CASE("distance") {
    Window trunc{10.0};
    Window torus{5.0, BoundaryMode::torus};
    CHECK(distance({1, 2}, {1, 2}, trunc) == 0.0);
    CHECK(distance({0, 0}, {3, 4}, trunc) == doctest::Approx(5.0));
    CHECK(distance({-4.5, 0}, {4.5, 0}, torus) == doctest::Approx(1.0));
    CHECK(distance({-4.5, 0}, {4.5, 0}, Window{5.0}) == doctest::Approx(9.0));
}

TEST_CASE("window radius") {
    auto tiers = one_tier(1.0);
    CHECK(interference_tail(tiers, 4.0, 100.0) == doctest::Approx(std::numbers::pi * 1e-4).epsilon(1e-12));

    double r1 = choose_window_radius(tiers, 4.0, 1e-4);
    double r2 = choose_window_radius(tiers, 4.0, 0.5e-4);
    CHECK(r2 / r1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
    // tail(R) <= eps annulus(R), tight at the returned radius
    CHECK(interference_tail(tiers, 4.0, r1) <= 1e-4 * interference_annulus(tiers, 4.0, r1) * (1 + 1e-9));

    double prev = choose_window_radius(tiers, 2.5, 1e-4);
    for (double a : {3.0, 4.0, 5.0, 6.0}) {
        double r = choose_window_radius(tiers, a, 1e-4);
        CHECK(r < prev);
        prev = r;
    }
    CHECK_THROWS_AS(choose_window_radius(tiers, 2.0, 1e-4), ConfigError);

    auto table = preset("fig5a").tiers;
    CHECK(auto_window_radius(table, 4.0, 1e-4) == doctest::Approx(1784.0).epsilon(1e-3));
}

TEST_CASE("sampling errors") {
    auto tiers = one_tier(1.0);
    CHECK_THROWS_AS(sample_deployment(tiers, {}, Window{0.0}, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_deployment(tiers, {}, Window{1e5}, 0.0, 1), RunError);
    CHECK_THROWS_AS(sample_deployment(one_tier(1e-4), {-1.0}, Window{10.0}, 0.0, 1), ConfigError);
}

TEST_CASE("window geometry") {
    Window w{10.0};
    CHECK(inside_window({7.0, -7.0}, w));
    CHECK_FALSE(inside_window({7.5, -7.5}, w));
    CHECK_FALSE(inside_window({10.1, 0}, w));
    CHECK(boundary_clearance({7, 0}, w) == doctest::Approx(3.0));
    CHECK(boundary_clearance({0, -8}, w) == doctest::Approx(2.0));
}
